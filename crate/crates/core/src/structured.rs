//! Invertible matrices from unit-triangular factors, and the non-invertible
//! scalar matrix built from a zero divisor of `Z_7[S_5]`.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::MatrixGR;
use crate::perm::Permutation;
use crate::ring::{GroupRingElement, RingContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triangle {
    Upper,
    Lower,
}

impl Triangle {
    fn holds(self, r: usize, c: usize) -> bool {
        match self {
            Triangle::Upper => r < c,
            Triangle::Lower => r > c,
        }
    }
}

/// Triangular matrix with a random permutation on each diagonal position and
/// random group ring elements strictly on one side of it.
pub fn random_unit_triangular<R: Rng + ?Sized>(
    ctx: &Arc<RingContext>,
    k: usize,
    shape: Triangle,
    rng: &mut R,
) -> MatrixGR {
    let mut x = MatrixGR::zero(ctx, k);
    for r in 0..k {
        for c in 0..k {
            let value = if r == c {
                let g = ctx.permutation(rng.gen_range(0..ctx.order()));
                GroupRingElement::from_permutation(ctx, g).expect("same degree")
            } else if shape.holds(r, c) {
                GroupRingElement::random(ctx, rng)
            } else {
                continue;
            };
            x.set_entry(r, c, &value).expect("same context");
        }
    }
    x
}

fn diagonal_permutation(x: &MatrixGR, i: usize) -> Result<Permutation> {
    let entry = x.entry_coeffs(i, i);
    let mut support = entry.iter().enumerate().filter(|(_, &c)| c != 0);
    match (support.next(), support.next()) {
        (Some((rank, 1)), None) => Ok(x.context().permutation(rank).clone()),
        _ => Err(Error::Unsupported(format!(
            "diagonal entry {i} is not a single group element"
        ))),
    }
}

/// Inverse of a triangular matrix whose diagonal holds group elements,
/// by back substitution.
pub fn unit_triangular_inverse(x: &MatrixGR, shape: Triangle) -> Result<MatrixGR> {
    let ctx = x.context();
    let k = x.dim();
    for r in 0..k {
        for c in 0..k {
            if r != c && !shape.holds(r, c) && x.entry_coeffs(r, c).iter().any(|&v| v != 0) {
                return Err(Error::Unsupported(format!(
                    "entry ({r}, {c}) breaks the triangular shape"
                )));
            }
        }
    }
    let diag_inv = (0..k)
        .map(|i| GroupRingElement::from_permutation(ctx, &diagonal_permutation(x, i)?.inverse()))
        .collect::<Result<Vec<_>>>()?;

    let mut inv = MatrixGR::zero(ctx, k);
    for (i, d) in diag_inv.iter().enumerate() {
        inv.set_entry(i, i, d)?;
    }
    // For upper: X[i][j] = -d_i^{-1} Σ_{i<l<=j} U[i][l] X[l][j], filled by increasing j - i.
    // For lower the roles of the indices mirror.
    for gap in 1..k {
        for (i, d) in diag_inv.iter().enumerate() {
            let j = match shape {
                Triangle::Upper if i + gap < k => i + gap,
                Triangle::Lower if i >= gap => i - gap,
                _ => continue,
            };
            let (lo, hi) = match shape {
                Triangle::Upper => (i + 1, j),
                Triangle::Lower => (j, i - 1),
            };
            let mut sum = GroupRingElement::zero(ctx);
            for l in lo..=hi {
                sum = &sum + &(&x.entry(i, l) * &inv.entry(l, j));
            }
            inv.set_entry(i, j, &-&(d * &sum))?;
        }
    }
    Ok(inv)
}

/// Product of `factors` unit-triangular matrices, alternating upper and lower,
/// returned with its inverse.
pub fn random_invertible<R: Rng + ?Sized>(
    ctx: &Arc<RingContext>,
    k: usize,
    factors: usize,
    rng: &mut R,
) -> Result<(MatrixGR, MatrixGR)> {
    if factors == 0 {
        return Err(Error::Unsupported(
            "invertible sampling needs at least one factor".into(),
        ));
    }
    let mut m = MatrixGR::identity(ctx, k);
    let mut inv = MatrixGR::identity(ctx, k);
    for f in 0..factors {
        let shape = if f % 2 == 0 {
            Triangle::Upper
        } else {
            Triangle::Lower
        };
        let factor = random_unit_triangular(ctx, k, shape, rng);
        let factor_inv = unit_triangular_inverse(&factor, shape)?;
        m = &m * &factor;
        inv = &factor_inv * &inv;
    }
    Ok((m, inv))
}

/// Default factor count for [`random_invertible`].
pub const INVERTIBLE_FACTORS: usize = 20;

/// One generator of each of the six subgroups of order 5 in `S_5`: the
/// lowest-ranked 5-cycle of each subgroup, sorted by rank.
pub fn order_five_generators() -> Vec<Permutation> {
    let mut seen = [false; 120];
    let mut out = Vec::new();
    for rank in 0..120 {
        let g = Permutation::unrank(5, rank).expect("rank in range");
        if seen[rank] || g.order() != 5 {
            continue;
        }
        let mut p = g.clone();
        for _ in 0..4 {
            seen[p.rank()] = true;
            p = p.compose(&g).expect("same degree");
        }
        out.push(g);
    }
    out
}

/// The element `(1 2)(3 4 5)`, of order 6.
pub fn order_six_element() -> Permutation {
    Permutation::parse_cycles("(1 2)(3 4 5)", 5).expect("valid cycle text")
}

fn require_z7s5(ctx: &RingContext) -> Result<()> {
    if ctx.modulus() == 7 && ctx.degree() == 5 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{ctx:?}: construction is defined over Z_7[S_5]"
        )))
    }
}

/// `(3+g_1)···(3+g_6)(5+h)`, with the `g_i` from [`order_five_generators`]
/// and `h` from [`order_six_element`].
pub fn zero_divisor_s(ctx: &Arc<RingContext>) -> Result<GroupRingElement> {
    require_z7s5(ctx)?;
    let three = GroupRingElement::scalar(ctx, 3);
    let mut s = GroupRingElement::one(ctx);
    for g in order_five_generators() {
        s = &s * &(&three + &GroupRingElement::from_permutation(ctx, &g)?);
    }
    let h = GroupRingElement::from_permutation(ctx, &order_six_element())?;
    Ok(&s * &(&GroupRingElement::scalar(ctx, 5) + &h))
}

/// `Σ_{i+j=5} h^i 2^j`. Since `5 + h = h - 2` and `h^6 = 1 = 2^6` in `Z_7[S_5]`,
/// `(5 + h)·t = h^6 - 2^6 = 0`, so `s·t = 0`.
pub fn zero_divisor_witness(ctx: &Arc<RingContext>) -> Result<GroupRingElement> {
    require_z7s5(ctx)?;
    let h = GroupRingElement::from_permutation(ctx, &order_six_element())?;
    let mut t = GroupRingElement::zero(ctx);
    let mut h_pow = GroupRingElement::one(ctx);
    for i in 0..=5u32 {
        t = &t + &h_pow.scale(2u32.pow(5 - i));
        h_pow = &h_pow * &h;
    }
    Ok(t)
}

/// The scalar matrix with [`zero_divisor_s`] on the diagonal.
pub fn scalar_s(ctx: &Arc<RingContext>, k: usize) -> Result<MatrixGR> {
    Ok(MatrixGR::scalar(&zero_divisor_s(ctx)?, k))
}
