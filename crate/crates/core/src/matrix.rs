//! Square matrices over `Z_n[S_m]` and their powers.

use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::ring::{nonzero_terms, uniform_residue, GroupRingElement, RingContext};
use rand::distributions::Distribution;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 16;

/// A `k×k` matrix stored as one flat coefficient vector: entry `(r, c)`
/// occupies `coeffs[(r·k + c)·m! ..][..m!]`.
#[derive(Clone)]
pub struct MatrixGR {
    ctx: Arc<RingContext>,
    k: usize,
    coeffs: Vec<u16>,
}

impl PartialEq for MatrixGR {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_ring(&other.ctx) && self.k == other.k && self.coeffs == other.coeffs
    }
}

impl Eq for MatrixGR {}

fn check_dim(k: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&k) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "matrix dimension {k} outside 1..={MAX_DIM}"
        )))
    }
}

impl MatrixGR {
    pub fn zero(ctx: &Arc<RingContext>, k: usize) -> Self {
        Self {
            ctx: ctx.clone(),
            k,
            coeffs: vec![0; k * k * ctx.order()],
        }
    }

    pub fn identity(ctx: &Arc<RingContext>, k: usize) -> Self {
        let mut x = Self::zero(ctx, k);
        for i in 0..k {
            x.coeffs[(i * k + i) * ctx.order()] = 1;
        }
        x
    }

    /// Diagonal matrix with `d` in every diagonal position.
    pub fn scalar(d: &GroupRingElement, k: usize) -> Self {
        let ctx = d.context();
        let mut x = Self::zero(ctx, k);
        for i in 0..k {
            x.entry_mut(i, i).copy_from_slice(d.coeffs());
        }
        x
    }

    /// Builds a matrix from `k²` entries in row-major order.
    pub fn from_entries(
        ctx: &Arc<RingContext>,
        k: usize,
        entries: &[GroupRingElement],
    ) -> Result<Self> {
        check_dim(k)?;
        if entries.len() != k * k {
            return Err(Error::ShapeMismatch(
                k,
                (entries.len() as f64).sqrt() as usize,
            ));
        }
        let mut x = Self::zero(ctx, k);
        for (i, e) in entries.iter().enumerate() {
            ctx.check_same(e.context())?;
            x.coeffs[i * ctx.order()..(i + 1) * ctx.order()].copy_from_slice(e.coeffs());
        }
        Ok(x)
    }

    pub(crate) fn from_raw(ctx: &Arc<RingContext>, k: usize, coeffs: Vec<u16>) -> Self {
        debug_assert_eq!(coeffs.len(), k * k * ctx.order());
        Self {
            ctx: ctx.clone(),
            k,
            coeffs,
        }
    }

    /// Every coefficient of every entry drawn uniformly from `0..n`.
    pub fn random<R: Rng + ?Sized>(ctx: &Arc<RingContext>, k: usize, rng: &mut R) -> Self {
        let dist = uniform_residue(ctx.modulus());
        let coeffs = (0..k * k * ctx.order()).map(|_| dist.sample(rng)).collect();
        Self {
            ctx: ctx.clone(),
            k,
            coeffs,
        }
    }

    pub fn context(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn entry_coeffs(&self, r: usize, c: usize) -> &[u16] {
        let order = self.ctx.order();
        &self.coeffs[(r * self.k + c) * order..][..order]
    }

    fn entry_mut(&mut self, r: usize, c: usize) -> &mut [u16] {
        let order = self.ctx.order();
        &mut self.coeffs[(r * self.k + c) * order..][..order]
    }

    pub fn entry(&self, r: usize, c: usize) -> GroupRingElement {
        GroupRingElement::from_reduced(&self.ctx, self.entry_coeffs(r, c).to_vec())
    }

    pub fn set_entry(&mut self, r: usize, c: usize, value: &GroupRingElement) -> Result<()> {
        self.ctx.check_same(value.context())?;
        self.entry_mut(r, c).copy_from_slice(value.coeffs());
        Ok(())
    }

    pub fn entries(&self) -> Vec<GroupRingElement> {
        (0..self.k * self.k)
            .map(|i| self.entry(i / self.k, i % self.k))
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.ctx, self.k)
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        self.ctx.check_same(&other.ctx)?;
        if self.k != other.k {
            return Err(Error::ShapeMismatch(self.k, other.k));
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let k = self.k;
        let order = self.ctx.order();
        let terms = |m: &Self| -> Vec<Vec<(u32, u32)>> {
            m.coeffs
                .chunks_exact(order)
                .map(|c| {
                    let mut v = Vec::new();
                    nonzero_terms(c, &mut v);
                    v
                })
                .collect()
        };
        let (a, b) = (terms(self), terms(other));
        let mut out = vec![0u16; k * k * order];
        let mut acc = vec![0u64; order];
        for i in 0..k {
            for j in 0..k {
                acc.fill(0);
                for l in 0..k {
                    self.ctx
                        .convolve_into(&mut acc, &a[i * k + l], &b[l * k + j]);
                }
                self.ctx
                    .reduce_into(&acc, &mut out[(i * k + j) * order..][..order]);
            }
        }
        Self::from_raw(&self.ctx, k, out)
    }

    /// `self^e`; `e = 0` gives the identity.
    pub fn pow(&self, e: &Exponent) -> Self {
        self.pow_counted(e).0
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        self.pow(&Exponent::from(e))
    }

    /// `self^e` together with the number of matrix products spent.
    /// Runs in block coordinates whenever the ring admits them.
    pub fn pow_counted(&self, e: &Exponent) -> (Self, u64) {
        if e.bits() > 1 {
            if let Some(s) = SpectralMatrix::from_matrix(self) {
                let (p, count) = square_and_multiply(&s, e);
                return (p.to_matrix(), count);
            }
        }
        self.pow_direct_counted(e)
    }

    /// Several powers of the same base, sharing one change of coordinates.
    pub fn pow_many(&self, exponents: &[&Exponent]) -> Vec<Self> {
        match SpectralMatrix::from_matrix(self) {
            Some(s) => exponents
                .iter()
                .map(|e| square_and_multiply(&s, e).0.to_matrix())
                .collect(),
            None => exponents.iter().map(|e| self.pow(e)).collect(),
        }
    }

    /// Square-and-multiply on coefficient vectors only.
    pub fn pow_direct_counted(&self, e: &Exponent) -> (Self, u64) {
        square_and_multiply(self, e)
    }

    /// Payload length in bits: `k²·m!·ceil(log2 n)`.
    pub fn encoded_bits(ctx: &RingContext, k: usize) -> usize {
        k * k * ctx.order() * ctx.coefficient_bits() as usize
    }

    pub fn encoded_len(ctx: &RingContext, k: usize) -> usize {
        Self::encoded_bits(ctx, k).div_ceil(8)
    }

    /// Canonical bit-packed payload: entries row-major, coefficients by rank,
    /// each `ceil(log2 n)` bits, least significant bit first.
    pub fn encode(&self) -> Vec<u8> {
        let w = self.ctx.coefficient_bits() as usize;
        let mut out = vec![0u8; Self::encoded_len(&self.ctx, self.k)];
        let mut pos = 0usize;
        for &c in &self.coeffs {
            for b in 0..w {
                if (c >> b) & 1 == 1 {
                    out[pos / 8] |= 1 << (pos % 8);
                }
                pos += 1;
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], ctx: &Arc<RingContext>, k: usize) -> Result<Self> {
        check_dim(k)?;
        let expected = Self::encoded_len(ctx, k);
        if bytes.len() != expected {
            return Err(Error::Encoding(format!(
                "payload is {} bytes, expected {expected}",
                bytes.len()
            )));
        }
        let w = ctx.coefficient_bits() as usize;
        let n = ctx.modulus();
        let bit = |pos: usize| (bytes[pos / 8] >> (pos % 8)) & 1;
        let mut coeffs = Vec::with_capacity(k * k * ctx.order());
        let mut pos = 0usize;
        for _ in 0..k * k * ctx.order() {
            let mut v = 0u32;
            for b in 0..w {
                v |= (bit(pos) as u32) << b;
                pos += 1;
            }
            if v >= n {
                return Err(Error::Coefficient {
                    value: v as u64,
                    modulus: n,
                });
            }
            coeffs.push(v as u16);
        }
        if (pos..bytes.len() * 8).any(|p| bit(p) != 0) {
            return Err(Error::Encoding("nonzero padding bits".into()));
        }
        Ok(Self::from_raw(ctx, k, coeffs))
    }
}

impl Mul for &MatrixGR {
    type Output = MatrixGR;
    fn mul(self, rhs: Self) -> MatrixGR {
        self.checked_mul(rhs)
            .expect("matrix shape or context mismatch")
    }
}

impl fmt::Display for MatrixGR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for r in 0..self.k {
            if r > 0 {
                f.write_str("; ")?;
            }
            for c in 0..self.k {
                if c > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.entry(r, c))?;
            }
        }
        f.write_str("]")
    }
}

impl fmt::Debug for MatrixGR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} over {:?}: {}", self.k, self.k, self.ctx, self)
    }
}

/// Matrix with every entry held in block coordinates. Products cost
/// `Σ d³` per entry pair instead of `(m!)²`.
#[derive(Clone)]
pub(crate) struct SpectralMatrix {
    ctx: Arc<RingContext>,
    k: usize,
    data: Vec<u32>,
}

impl PartialEq for SpectralMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.data == other.data
    }
}

impl SpectralMatrix {
    pub(crate) fn from_matrix(m: &MatrixGR) -> Option<Self> {
        let basis = m.ctx.spectral()?;
        let order = m.ctx.order();
        let mut data = vec![0u32; m.coeffs.len()];
        for (src, dst) in m
            .coeffs
            .chunks_exact(order)
            .zip(data.chunks_exact_mut(order))
        {
            basis.transform(src, dst);
        }
        Some(Self {
            ctx: m.ctx.clone(),
            k: m.k,
            data,
        })
    }

    pub(crate) fn to_matrix(&self) -> MatrixGR {
        let basis = self.ctx.spectral().expect("built from a spectral context");
        let order = self.ctx.order();
        let mut coeffs = vec![0u16; self.data.len()];
        for (src, dst) in self
            .data
            .chunks_exact(order)
            .zip(coeffs.chunks_exact_mut(order))
        {
            basis.inverse_transform(src, dst);
        }
        MatrixGR::from_raw(&self.ctx, self.k, coeffs)
    }
}

pub(crate) trait Monoid: Clone {
    fn product(&self, other: &Self) -> Self;
    fn unit(&self) -> Self;
}

impl Monoid for MatrixGR {
    fn product(&self, other: &Self) -> Self {
        self.mul_unchecked(other)
    }

    fn unit(&self) -> Self {
        Self::identity(&self.ctx, self.k)
    }
}

impl Monoid for SpectralMatrix {
    fn product(&self, other: &Self) -> Self {
        let basis = self.ctx.spectral().expect("built from a spectral context");
        let p = basis.modulus() as u64;
        let (k, order) = (self.k, self.ctx.order());
        let mut out = vec![0u32; self.data.len()];
        let mut acc = vec![0u64; order];
        for i in 0..k {
            for j in 0..k {
                acc.fill(0);
                for l in 0..k {
                    basis.accumulate_product(
                        &mut acc,
                        &self.data[(i * k + l) * order..][..order],
                        &other.data[(l * k + j) * order..][..order],
                    );
                }
                for (o, a) in out[(i * k + j) * order..][..order].iter_mut().zip(&acc) {
                    *o = (a % p) as u32;
                }
            }
        }
        Self {
            ctx: self.ctx.clone(),
            k,
            data: out,
        }
    }

    fn unit(&self) -> Self {
        Self::from_matrix(&MatrixGR::identity(&self.ctx, self.k)).expect("spectral context")
    }
}

/// Left-to-right binary powering; spends at most `2·(bitlen(e) − 1)` products.
pub(crate) fn square_and_multiply<T: Monoid>(base: &T, e: &Exponent) -> (T, u64) {
    let bits = e.bits();
    if bits == 0 {
        return (base.unit(), 0);
    }
    let mut acc = base.clone();
    let mut count = 0;
    for i in (0..bits - 1).rev() {
        acc = acc.product(&acc);
        count += 1;
        if e.bit(i) {
            acc = acc.product(base);
            count += 1;
        }
    }
    (acc, count)
}

const WINDOW_BITS: u64 = 4;

struct Windows<T> {
    base: T,
    // rows[i][d - 1] = base^(d · 16^i)
    rows: Vec<Vec<T>>,
}

impl<T: Monoid> Windows<T> {
    fn new(base: T, max_bits: u64) -> Self {
        let digits = (1u64 << WINDOW_BITS) as usize;
        let mut rows: Vec<Vec<T>> = Vec::new();
        let mut step = base.clone();
        for _ in 0..max_bits.div_ceil(WINDOW_BITS) {
            let mut row = Vec::with_capacity(digits - 1);
            row.push(step.clone());
            for d in 1..digits - 1 {
                row.push(row[d - 1].product(&step));
            }
            step = row[digits - 2].product(&step);
            rows.push(row);
        }
        Self { base, rows }
    }

    fn pow(&self, e: &Exponent) -> T {
        if e.bits() > self.rows.len() as u64 * WINDOW_BITS {
            return square_and_multiply(&self.base, e).0;
        }
        let mut acc: Option<T> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let mut d = 0usize;
            for b in 0..WINDOW_BITS {
                if e.bit(i as u64 * WINDOW_BITS + b) {
                    d |= 1 << b;
                }
            }
            if d > 0 {
                acc = Some(match acc {
                    None => row[d - 1].clone(),
                    Some(a) => a.product(&row[d - 1]),
                });
            }
        }
        acc.unwrap_or_else(|| self.base.unit())
    }
}

enum FixedRepr {
    Direct(Windows<MatrixGR>),
    Spectral(Windows<SpectralMatrix>),
}

/// Precomputed powers of one base matrix, for drawing many powers of the same base.
/// Exponents longer than `max_bits` fall back to plain square-and-multiply.
pub struct FixedBase {
    repr: FixedRepr,
}

impl FixedBase {
    pub fn new(base: &MatrixGR, max_bits: u64) -> Self {
        let repr = match SpectralMatrix::from_matrix(base) {
            Some(s) => FixedRepr::Spectral(Windows::new(s, max_bits)),
            None => FixedRepr::Direct(Windows::new(base.clone(), max_bits)),
        };
        Self { repr }
    }

    pub fn pow(&self, e: &Exponent) -> MatrixGR {
        match &self.repr {
            FixedRepr::Direct(w) => w.pow(e),
            FixedRepr::Spectral(w) => w.pow(e).to_matrix(),
        }
    }
}
