//! Block-diagonal ("Fourier") coordinates for `Z_p[S_m]` when `p` is a prime
//! larger than `m`.
//!
//! Under those conditions `Z_p[S_m]` is isomorphic to a product of full
//! matrix algebras, one per partition of `m`, and the isomorphism is the linear
//! extension of Young's seminormal representations. A product of two group
//! ring elements then costs `Σ d³` multiply-adds instead of `(m!)²`.
//!
//! The inverse transform is obtained by Gauss-Jordan elimination of the
//! forward matrix, so correctness does not lean on orthogonality relations.

use std::collections::HashMap;

use crate::perm::{factorial, Permutation, TABLE_DEGREE_CAP};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Block {
    pub offset: usize,
    pub dim: usize,
}

pub(crate) struct SpectralBasis {
    modulus: u32,
    order: usize,
    blocks: Vec<Block>,
    // forward[row * order + g]: entry `row` of the block image of group element g.
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

pub(crate) fn is_prime(n: u32) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn inv_mod(x: u64, p: u64) -> u64 {
    pow_mod(x, p - 2, p)
}

fn partitions(m: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            go(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(m, m, &mut Vec::new(), &mut out);
    out
}

/// Standard tableaux of `shape`, each given as the (row, col) cell of every
/// number 0..m.
fn standard_tableaux(shape: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn go(
        shape: &[usize],
        filled: &mut Vec<usize>,
        cells: &mut Vec<(usize, usize)>,
        total: usize,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if cells.len() == total {
            out.push(cells.clone());
            return;
        }
        for r in 0..shape.len() {
            let addable = filled[r] < shape[r] && (r == 0 || filled[r - 1] > filled[r]);
            if addable {
                cells.push((r, filled[r]));
                filled[r] += 1;
                go(shape, filled, cells, total, out);
                filled[r] -= 1;
                cells.pop();
            }
        }
    }
    let total = shape.iter().sum();
    let mut out = Vec::new();
    go(
        shape,
        &mut vec![0; shape.len()],
        &mut Vec::new(),
        total,
        &mut out,
    );
    out
}

type Mat = Vec<u64>;

fn mat_mul(a: &Mat, b: &Mat, d: usize, p: u64) -> Mat {
    let mut c = vec![0u64; d * d];
    for r in 0..d {
        for t in 0..d {
            let x = a[r * d + t];
            if x == 0 {
                continue;
            }
            for col in 0..d {
                c[r * d + col] = (c[r * d + col] + x * b[t * d + col]) % p;
            }
        }
    }
    c
}

/// Seminormal matrices of the adjacent transpositions (i, i+1), i = 1..m-1.
fn seminormal_generators(shape: &[usize], p: u64) -> Vec<Mat> {
    let tableaux = standard_tableaux(shape);
    let d = tableaux.len();
    let index: HashMap<&Vec<(usize, usize)>, usize> =
        tableaux.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let m: usize = shape.iter().sum();
    let content = |(r, c): (usize, usize)| c as i64 - r as i64;
    let residue = |x: i64| x.rem_euclid(p as i64) as u64;

    (0..m.saturating_sub(1))
        .map(|i| {
            let mut g = vec![0u64; d * d];
            for (col, t) in tableaux.iter().enumerate() {
                let (a, b) = (t[i], t[i + 1]);
                if a.0 == b.0 {
                    g[col * d + col] = 1;
                } else if a.1 == b.1 {
                    g[col * d + col] = p - 1;
                } else {
                    let axial = content(b) - content(a);
                    let inv_r = inv_mod(residue(axial), p);
                    let mut swapped = t.clone();
                    swapped.swap(i, i + 1);
                    let row = index[&swapped];
                    g[col * d + col] = inv_r;
                    g[row * d + col] = if a.0 < b.0 {
                        1
                    } else {
                        // 1 - 1/r²
                        (1 + p - inv_r * inv_r % p) % p
                    };
                }
            }
            g
        })
        .collect()
}

/// Solves `A · X = I` modulo the prime `p`; `None` when `A` is singular.
fn invert_mod(a: &[u32], n: usize, p: u64) -> Option<Vec<u32>> {
    let w = 2 * n;
    let mut aug = vec![0u64; n * w];
    for r in 0..n {
        for c in 0..n {
            aug[r * w + c] = a[r * n + c] as u64;
        }
        aug[r * w + n + r] = 1;
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| aug[r * w + col] != 0)?;
        if pivot != col {
            for c in 0..w {
                aug.swap(pivot * w + c, col * w + c);
            }
        }
        let inv = inv_mod(aug[col * w + col], p);
        for c in 0..w {
            aug[col * w + c] = aug[col * w + c] * inv % p;
        }
        for r in 0..n {
            let f = aug[r * w + col];
            if r == col || f == 0 {
                continue;
            }
            for c in 0..w {
                aug[r * w + c] = (aug[r * w + c] + (p - f) * aug[col * w + c]) % p;
            }
        }
    }
    Some(
        (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| aug[r * w + n + c] as u32)
            .collect(),
    )
}

impl SpectralBasis {
    /// Builds the basis for `Z_p[S_m]`, or `None` if `p` is not a prime
    /// above `m` or `m` is beyond the table cap.
    pub(crate) fn build(p: u32, m: usize) -> Option<Self> {
        if !is_prime(p) || p as usize <= m || m == 0 || m > TABLE_DEGREE_CAP {
            return None;
        }
        let pp = p as u64;
        let order = factorial(m);
        let perms: Vec<Permutation> = (0..order)
            .map(|r| Permutation::unrank(m, r).unwrap())
            .collect();
        let transpositions: Vec<usize> = (1..m)
            .map(|i| {
                Permutation::parse_cycles(&format!("({} {})", i, i + 1), m)
                    .unwrap()
                    .rank()
            })
            .collect();

        let mut blocks = Vec::new();
        let mut images: Vec<Vec<Mat>> = Vec::new();
        let mut offset = 0;
        for shape in partitions(m) {
            let gens = seminormal_generators(&shape, pp);
            let d = standard_tableaux(&shape).len();
            let mut identity = vec![0u64; d * d];
            for i in 0..d {
                identity[i * d + i] = 1;
            }
            // Breadth-first over the Cayley graph: rho(s ∘ g) = rho(s) rho(g).
            let mut rho: Vec<Option<Mat>> = vec![None; order];
            rho[0] = Some(identity);
            let mut frontier = vec![0usize];
            while let Some(g) = frontier.pop() {
                for (s, &s_rank) in transpositions.iter().enumerate() {
                    let h = perms[s_rank].compose(&perms[g]).unwrap().rank();
                    if rho[h].is_none() {
                        rho[h] = Some(mat_mul(&gens[s], rho[g].as_ref().unwrap(), d, pp));
                        frontier.push(h);
                    }
                }
            }
            images.push(rho.into_iter().map(Option::unwrap).collect());
            blocks.push(Block { offset, dim: d });
            offset += d * d;
        }
        debug_assert_eq!(offset, order);

        let mut forward = vec![0u32; order * order];
        for (block, rho) in blocks.iter().zip(&images) {
            for (g, mat) in rho.iter().enumerate() {
                for (e, &v) in mat.iter().enumerate() {
                    forward[(block.offset + e) * order + g] = v as u32;
                }
            }
        }
        let inverse = invert_mod(&forward, order, pp)?;
        Some(Self {
            modulus: p,
            order,
            blocks,
            forward,
            inverse,
        })
    }

    #[cfg(test)]
    pub(crate) fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub(crate) fn modulus(&self) -> u32 {
        self.modulus
    }

    fn apply(&self, matrix: &[u32], input: impl Fn(usize) -> u64, out: &mut [u32]) {
        let n = self.order;
        let p = self.modulus as u64;
        let x: Vec<u64> = (0..n).map(input).collect();
        for (row, slot) in out.iter_mut().enumerate() {
            let coeffs = &matrix[row * n..(row + 1) * n];
            let acc: u64 = coeffs.iter().zip(&x).map(|(&a, &b)| a as u64 * b).sum();
            *slot = (acc % p) as u32;
        }
    }

    /// Group-element coordinates to block coordinates.
    pub(crate) fn transform(&self, coeffs: &[u16], out: &mut [u32]) {
        self.apply(&self.forward, |i| coeffs[i] as u64, out);
    }

    pub(crate) fn inverse_transform(&self, spectral: &[u32], out: &mut [u16]) {
        let mut tmp = vec![0u32; self.order];
        self.apply(&self.inverse, |i| spectral[i] as u64, &mut tmp);
        for (o, v) in out.iter_mut().zip(tmp) {
            *o = v as u16;
        }
    }

    /// `out += Σ_l a_l · b_l` blockwise, where each pair is one product term of
    /// a matrix entry. Accumulates unreduced into `acc`.
    #[inline]
    pub(crate) fn accumulate_product(&self, acc: &mut [u64], a: &[u32], b: &[u32]) {
        for block in &self.blocks {
            let d = block.dim;
            let off = block.offset;
            let a = &a[off..off + d * d];
            let b = &b[off..off + d * d];
            let acc = &mut acc[off..off + d * d];
            for r in 0..d {
                let acc_row = &mut acc[r * d..(r + 1) * d];
                for t in 0..d {
                    let x = a[r * d + t] as u64;
                    if x == 0 {
                        continue;
                    }
                    let b_row = &b[t * d..(t + 1) * d];
                    for (slot, &y) in acc_row.iter_mut().zip(b_row) {
                        *slot += x * y as u64;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_and_tableau_counts() {
        assert_eq!(partitions(5).len(), 7);
        let dims: Vec<usize> = partitions(5)
            .iter()
            .map(|s| standard_tableaux(s).len())
            .collect();
        assert_eq!(dims, vec![1, 4, 5, 6, 5, 4, 1]);
        assert_eq!(dims.iter().map(|d| d * d).sum::<usize>(), 120);
    }

    #[test]
    fn availability() {
        assert!(SpectralBasis::build(7, 5).is_some());
        assert!(SpectralBasis::build(7, 3).is_some());
        assert!(SpectralBasis::build(5, 5).is_none());
        assert!(SpectralBasis::build(2, 5).is_none());
        assert!(SpectralBasis::build(9, 3).is_none());
    }

    #[test]
    fn images_are_homomorphic() {
        // Check rho(g ∘ h) = rho(g) rho(h) on every pair of S_4 and a sample of S_5.
        for (p, m, stride) in [(5u32, 4usize, 1usize), (7, 5, 7)] {
            let basis = SpectralBasis::build(p, m).unwrap();
            let order = factorial(m);
            let pp = p as u64;
            let image = |g: usize, block: &Block| -> Mat {
                (0..block.dim * block.dim)
                    .map(|e| basis.forward[(block.offset + e) * order + g] as u64)
                    .collect()
            };
            for g in (0..order).step_by(stride) {
                for h in 0..order {
                    let pg = Permutation::unrank(m, g).unwrap();
                    let ph = Permutation::unrank(m, h).unwrap();
                    let gh = pg.compose(&ph).unwrap().rank();
                    for block in basis.blocks() {
                        assert_eq!(
                            image(gh, block),
                            mat_mul(&image(g, block), &image(h, block), block.dim, pp)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn transform_roundtrip() {
        let basis = SpectralBasis::build(7, 5).unwrap();
        let coeffs: Vec<u16> = (0..120).map(|i| (i * 37 % 7) as u16).collect();
        let mut spec = vec![0u32; 120];
        basis.transform(&coeffs, &mut spec);
        let mut back = vec![0u16; 120];
        basis.inverse_transform(&spec, &mut back);
        assert_eq!(back, coeffs);
    }
}
