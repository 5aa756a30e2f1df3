//! Permutations of `{1..m}` and the precomputed multiplication table of `S_m`.
//!
//! Composition follows the "right factor acts first" convention:
//! `p.compose(&q)` maps `x` to `p(q(x))`. Ranks are lexicographic positions
//! of the one-line notation (Lehmer code), so rank 0 is always the identity.
//!
//! Points are 1-based everywhere they cross the public interface.

use std::fmt;

use crate::error::{Error, Result};

/// Largest degree whose rank still fits in a `usize` on 64-bit targets.
pub const MAX_DEGREE: usize = 20;

/// Largest degree for which [`MultTable`] is built; beyond this, products are
/// composed on the fly.
pub const TABLE_DEGREE_CAP: usize = 6;

pub fn factorial(m: usize) -> usize {
    (1..=m).product()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    // 0-based: images[i] is the image of point i+1, minus one.
    images: Vec<u8>,
}

impl Permutation {
    pub fn identity(m: usize) -> Self {
        assert!((1..=MAX_DEGREE).contains(&m), "degree {m} out of range");
        Self {
            images: (0..m as u8).collect(),
        }
    }

    /// Builds a permutation from its one-line notation with 1-based images.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let m = images.len();
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::InvalidPermutation(format!(
                "degree {m} out of range 1..={MAX_DEGREE}"
            )));
        }
        let mut seen = vec![false; m];
        let mut out = Vec::with_capacity(m);
        for &x in images {
            if x == 0 || x > m || seen[x - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection on 1..={m}"
                )));
            }
            seen[x - 1] = true;
            out.push((x - 1) as u8);
        }
        Ok(Self { images: out })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// One-line notation, 1-based.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize + 1).collect()
    }

    /// Image of the 1-based `point`.
    pub fn apply(&self, point: usize) -> usize {
        self.images[point - 1] as usize + 1
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(Self {
            images: other
                .images
                .iter()
                .map(|&x| self.images[x as usize])
                .collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u8; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u8;
        }
        Self { images }
    }

    /// Parity as `+1` (even) or `-1` (odd).
    pub fn sign(&self) -> i8 {
        // Each cycle of length L contributes L-1 transpositions.
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Order in the group: lcm of the cycle lengths.
    pub fn order(&self) -> usize {
        self.cycles()
            .iter()
            .fold(1, |acc, c| num_integer::lcm(acc, c.len()))
    }

    /// Lexicographic rank of the one-line notation.
    pub fn rank(&self) -> usize {
        let m = self.degree();
        let mut rank = 0;
        for i in 0..m {
            let smaller_later = self.images[i + 1..]
                .iter()
                .filter(|&&x| x < self.images[i])
                .count();
            rank += smaller_later * factorial(m - 1 - i);
        }
        rank
    }

    pub fn unrank(m: usize, rank: usize) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::InvalidPermutation(format!(
                "degree {m} out of range 1..={MAX_DEGREE}"
            )));
        }
        if rank >= factorial(m) {
            return Err(Error::RankOutOfRange { rank, degree: m });
        }
        let mut pool: Vec<u8> = (0..m as u8).collect();
        let mut rest = rank;
        let mut images = Vec::with_capacity(m);
        for i in 0..m {
            let f = factorial(m - 1 - i);
            images.push(pool.remove(rest / f));
            rest %= f;
        }
        Ok(Self { images })
    }

    /// Non-trivial cycles, each starting at its smallest point, sorted by that
    /// point. Points are 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.degree();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start + 1];
            seen[start] = true;
            let mut x = self.images[start] as usize;
            while x != start {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x] as usize;
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Parses cycle notation such as `"(1 5 4 3 2)"`, `"(15)(24)"`, `"e"`,
    /// `"ε"` or `"\epsilon"`. A product of overlapping cycles is evaluated as
    /// a composition, rightmost cycle first.
    pub fn parse_cycles(text: &str, m: usize) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::InvalidPermutation(format!(
                "degree {m} out of range 1..={MAX_DEGREE}"
            )));
        }
        let text = text.trim();
        if is_identity_symbol(text) {
            return Ok(Self::identity(m));
        }
        if text.is_empty() {
            return Err(Error::Parse("empty permutation".into()));
        }
        let mut cycles = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let Some(body) = rest.strip_prefix('(') else {
                return Err(Error::Parse(format!("expected '(' in {text:?}")));
            };
            let close = body
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
            cycles.push(parse_cycle_points(&body[..close], m)?);
            rest = body[close + 1..].trim_start();
        }
        let mut acc = Self::identity(m);
        for cycle in &cycles {
            let mut images: Vec<u8> = (0..m as u8).collect();
            for (i, &x) in cycle.iter().enumerate() {
                images[x - 1] = (cycle[(i + 1) % cycle.len()] - 1) as u8;
            }
            acc = acc.compose(&Self { images })?;
        }
        Ok(acc)
    }
}

pub(crate) fn is_identity_symbol(text: &str) -> bool {
    matches!(text, "e" | "ε" | "\\epsilon")
}

fn parse_cycle_points(body: &str, m: usize) -> Result<Vec<usize>> {
    let body = body.trim();
    let tokens: Vec<&str> = if body.contains(char::is_whitespace) {
        body.split_whitespace().collect()
    } else {
        // Unspaced cycles are only unambiguous with single-digit points.
        body.char_indices()
            .map(|(i, c)| &body[i..i + c.len_utf8()])
            .collect()
    };
    if tokens.is_empty() {
        return Err(Error::Parse("empty cycle".into()));
    }
    let mut points = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let x: usize = tok
            .parse()
            .map_err(|_| Error::Parse(format!("bad point {tok:?} in cycle ({body})")))?;
        if x == 0 || x > m {
            return Err(Error::Parse(format!("point {x} out of range 1..={m}")));
        }
        if points.contains(&x) {
            return Err(Error::Parse(format!(
                "point {x} repeated within cycle ({body})"
            )));
        }
        points.push(x);
    }
    Ok(points)
}

impl fmt::Display for Permutation {
    /// Canonical disjoint-cycle form; the identity prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("e");
        }
        for c in cycles {
            f.write_str("(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

/// Multiplication table of `S_m` indexed by lexicographic rank.
#[derive(Clone, Debug)]
pub struct MultTable {
    degree: usize,
    order: usize,
    table: Vec<u16>,
    sign: Vec<i8>,
    inverse: Vec<u16>,
}

impl MultTable {
    pub fn build(m: usize) -> Result<Self> {
        if m == 0 || m > TABLE_DEGREE_CAP {
            return Err(Error::TableDegree {
                degree: m,
                cap: TABLE_DEGREE_CAP,
            });
        }
        let order = factorial(m);
        let perms: Vec<Permutation> = (0..order)
            .map(|r| Permutation::unrank(m, r))
            .collect::<Result<_>>()?;
        let mut table = Vec::with_capacity(order * order);
        for p in &perms {
            for q in &perms {
                table.push(p.compose(q)?.rank() as u16);
            }
        }
        let sign = perms.iter().map(Permutation::sign).collect();
        let inverse = perms.iter().map(|p| p.inverse().rank() as u16).collect();
        Ok(Self {
            degree: m,
            order,
            table,
            sign,
            inverse,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `rank(unrank(i) ∘ unrank(j))`.
    #[inline]
    pub fn product(&self, i: usize, j: usize) -> usize {
        self.table[i * self.order + j] as usize
    }

    /// Row `i`: the ranks of `unrank(i) ∘ unrank(j)` for every `j`.
    #[inline]
    pub fn row(&self, i: usize) -> &[u16] {
        &self.table[i * self.order..(i + 1) * self.order]
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.sign[i]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverse[i] as usize
    }
}
