//! Arithmetic in the group ring `Z_n[S_m]`.
//!
//! Elements are dense coefficient vectors of length `m!`, indexed by
//! permutation rank. Coefficients are always stored reduced into `0..n`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::{factorial, is_identity_symbol, MultTable, Permutation, TABLE_DEGREE_CAP};
use crate::spectral::SpectralBasis;

/// Largest symmetric-group degree accepted by [`RingContext`].
pub const MAX_RING_DEGREE: usize = 8;
/// Largest coefficient modulus; coefficients are stored as `u16`.
pub const MAX_MODULUS: u32 = u16::MAX as u32;

/// The parameters `(n, m)` of `Z_n[S_m]` plus the shared lookup tables.
pub struct RingContext {
    modulus: u32,
    degree: usize,
    order: usize,
    table: Option<MultTable>,
    perms: Vec<Permutation>,
    spectral: OnceLock<Option<SpectralBasis>>,
}

impl fmt::Debug for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}[S_{}]", self.modulus, self.degree)
    }
}

impl RingContext {
    /// Builds `Z_n[S_m]`, precomputing the multiplication table when
    /// `m <= TABLE_DEGREE_CAP`.
    pub fn new(n: u32, m: usize) -> Result<Arc<Self>> {
        Self::build(n, m, m <= TABLE_DEGREE_CAP)
    }

    /// Same ring, but every product composes permutations on the fly.
    pub fn without_table(n: u32, m: usize) -> Result<Arc<Self>> {
        Self::build(n, m, false)
    }

    fn build(n: u32, m: usize, with_table: bool) -> Result<Arc<Self>> {
        if !(2..=MAX_MODULUS).contains(&n) {
            return Err(Error::Unsupported(format!(
                "modulus {n} outside 2..={MAX_MODULUS}"
            )));
        }
        if !(1..=MAX_RING_DEGREE).contains(&m) {
            return Err(Error::Unsupported(format!(
                "degree {m} outside 1..={MAX_RING_DEGREE}"
            )));
        }
        let order = factorial(m);
        let perms = (0..order)
            .map(|r| Permutation::unrank(m, r))
            .collect::<Result<Vec<_>>>()?;
        let table = if with_table {
            Some(MultTable::build(m)?)
        } else {
            None
        };
        Ok(Arc::new(Self {
            modulus: n,
            degree: m,
            order,
            table,
            perms,
            spectral: OnceLock::new(),
        }))
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `m!`, the length of every coefficient vector.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self) -> Option<&MultTable> {
        self.table.as_ref()
    }

    pub fn permutation(&self, rank: usize) -> &Permutation {
        &self.perms[rank]
    }

    /// Bits per packed coefficient: `ceil(log2 n)`.
    pub fn coefficient_bits(&self) -> u32 {
        u32::BITS - (self.modulus - 1).leading_zeros()
    }

    pub fn product_rank(&self, i: usize, j: usize) -> usize {
        match &self.table {
            Some(t) => t.product(i, j),
            None => self.perms[i]
                .compose(&self.perms[j])
                .expect("same degree")
                .rank(),
        }
    }

    pub(crate) fn spectral(&self) -> Option<&SpectralBasis> {
        self.spectral
            .get_or_init(|| SpectralBasis::build(self.modulus, self.degree))
            .as_ref()
    }

    /// Whether products of matrices over this ring can run in block coordinates.
    pub fn has_spectral_basis(&self) -> bool {
        self.spectral().is_some()
    }

    pub fn same_ring(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.degree == other.degree
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(
                self.modulus,
                self.degree,
                other.modulus,
                other.degree,
            ))
        }
    }

    /// `acc[g_j g_k] += a_j b_k` over the given nonzero terms, unreduced.
    pub(crate) fn convolve_into(&self, acc: &mut [u64], a: &[(u32, u32)], b: &[(u32, u32)]) {
        match &self.table {
            Some(t) => {
                for &(j, aj) in a {
                    let row = t.row(j as usize);
                    let aj = aj as u64;
                    for &(k, bk) in b {
                        acc[row[k as usize] as usize] += aj * bk as u64;
                    }
                }
            }
            None => {
                for &(j, aj) in a {
                    let pj = &self.perms[j as usize];
                    for &(k, bk) in b {
                        let r = pj
                            .compose(&self.perms[k as usize])
                            .expect("same degree")
                            .rank();
                        acc[r] += aj as u64 * bk as u64;
                    }
                }
            }
        }
    }

    pub(crate) fn reduce_into(&self, acc: &[u64], out: &mut [u16]) {
        let n = self.modulus as u64;
        for (o, &a) in out.iter_mut().zip(acc) {
            *o = (a % n) as u16;
        }
    }
}

pub(crate) fn nonzero_terms(coeffs: &[u16], out: &mut Vec<(u32, u32)>) {
    out.clear();
    out.extend(
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i as u32, c as u32)),
    );
}

/// Image of an element under the map induced by the sign homomorphism
/// `S_m -> {±1}`: the coefficient sums over even and odd permutations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignImage {
    pub even: u32,
    pub odd: u32,
}

impl SignImage {
    /// Product in `Z_n[Z_2]`.
    pub fn mul(self, other: Self, modulus: u32) -> Self {
        let n = modulus as u64;
        let (a, b, c, d) = (
            self.even as u64,
            self.odd as u64,
            other.even as u64,
            other.odd as u64,
        );
        Self {
            even: ((a * c + b * d) % n) as u32,
            odd: ((a * d + b * c) % n) as u32,
        }
    }
}

#[derive(Clone)]
pub struct GroupRingElement {
    ctx: Arc<RingContext>,
    coeffs: Vec<u16>,
}

impl PartialEq for GroupRingElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_ring(&other.ctx) && self.coeffs == other.coeffs
    }
}

impl Eq for GroupRingElement {}

impl GroupRingElement {
    pub fn zero(ctx: &Arc<RingContext>) -> Self {
        Self {
            ctx: ctx.clone(),
            coeffs: vec![0; ctx.order],
        }
    }

    pub fn one(ctx: &Arc<RingContext>) -> Self {
        let mut x = Self::zero(ctx);
        x.coeffs[0] = 1;
        x
    }

    /// The group element `p` embedded with coefficient 1.
    pub fn from_permutation(ctx: &Arc<RingContext>, p: &Permutation) -> Result<Self> {
        if p.degree() != ctx.degree {
            return Err(Error::DegreeMismatch(p.degree(), ctx.degree));
        }
        let mut x = Self::zero(ctx);
        x.coeffs[p.rank()] = 1;
        Ok(x)
    }

    /// `c·e`, the embedded scalar.
    pub fn scalar(ctx: &Arc<RingContext>, c: u32) -> Self {
        let mut x = Self::zero(ctx);
        x.coeffs[0] = (c % ctx.modulus) as u16;
        x
    }

    pub fn from_coeffs(ctx: &Arc<RingContext>, coeffs: Vec<u16>) -> Result<Self> {
        if coeffs.len() != ctx.order {
            return Err(Error::Encoding(format!(
                "expected {} coefficients, got {}",
                ctx.order,
                coeffs.len()
            )));
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c as u32 >= ctx.modulus) {
            return Err(Error::Coefficient {
                value: bad as u64,
                modulus: ctx.modulus,
            });
        }
        Ok(Self {
            ctx: ctx.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_reduced(ctx: &Arc<RingContext>, coeffs: Vec<u16>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| (c as u32) < ctx.modulus));
        Self {
            ctx: ctx.clone(),
            coeffs,
        }
    }

    /// Each coefficient drawn independently and uniformly from `0..n`.
    pub fn random<R: Rng + ?Sized>(ctx: &Arc<RingContext>, rng: &mut R) -> Self {
        let dist = uniform_residue(ctx.modulus);
        Self {
            ctx: ctx.clone(),
            coeffs: (0..ctx.order).map(|_| dist.sample(rng)).collect(),
        }
    }

    pub fn context(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn coefficient(&self, p: &Permutation) -> u16 {
        self.coeffs[p.rank()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Number of nonzero coefficients.
    pub fn support_size(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let n = self.ctx.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| ((a as u32 + b as u32) % n) as u16)
            .collect();
        Ok(Self::from_reduced(&self.ctx, coeffs))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    /// Convolution product `Σ_i (Σ_{g_j g_k = g_i} a_j b_k) g_i`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        let mut a = Vec::new();
        let mut b = Vec::new();
        nonzero_terms(&self.coeffs, &mut a);
        nonzero_terms(&other.coeffs, &mut b);
        let mut acc = vec![0u64; self.ctx.order];
        self.ctx.convolve_into(&mut acc, &a, &b);
        let mut coeffs = vec![0u16; self.ctx.order];
        self.ctx.reduce_into(&acc, &mut coeffs);
        Ok(Self::from_reduced(&self.ctx, coeffs))
    }

    /// Multiplies every coefficient by `c` modulo `n`.
    pub fn scale(&self, c: u32) -> Self {
        let n = self.ctx.modulus as u64;
        let c = c as u64 % n;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| (a as u64 * c % n) as u16)
            .collect();
        Self::from_reduced(&self.ctx, coeffs)
    }

    fn neg_ref(&self) -> Self {
        let n = self.ctx.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| ((n - a as u32) % n) as u16)
            .collect();
        Self::from_reduced(&self.ctx, coeffs)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.ctx);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn sign_image(&self) -> SignImage {
        let n = self.ctx.modulus as u64;
        let (mut even, mut odd) = (0u64, 0u64);
        for (r, &c) in self.coeffs.iter().enumerate() {
            let is_even = match &self.ctx.table {
                Some(t) => t.sign(r) == 1,
                None => self.ctx.perms[r].sign() == 1,
            };
            if is_even {
                even += c as u64;
            } else {
                odd += c as u64;
            }
        }
        SignImage {
            even: (even % n) as u32,
            odd: (odd % n) as u32,
        }
    }

    /// Parses a term sum such as `"5(123)+2(15)(24)+(153)"` or `"3e+(1 2)"`.
    /// Repeated terms add up; `"0"` is the zero element.
    pub fn parse(text: &str, ctx: &Arc<RingContext>) -> Result<Self> {
        let text = text.trim();
        let mut x = Self::zero(ctx);
        if text == "0" {
            return Ok(x);
        }
        let n = ctx.modulus;
        for term in text.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {text:?}")));
            }
            let digits = term.len() - term.trim_start_matches(|c: char| c.is_ascii_digit()).len();
            let coefficient = if digits == 0 {
                1
            } else {
                let c: u64 = term[..digits]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient in {term:?}")))?;
                if c >= n as u64 {
                    return Err(Error::Coefficient {
                        value: c,
                        modulus: n,
                    });
                }
                c as u32
            };
            let body = term[digits..].trim();
            if body.is_empty() {
                return Err(Error::Parse(format!("term {term:?} has no group element")));
            }
            if !body.starts_with('(') && !is_identity_symbol(body) {
                return Err(Error::Parse(format!("bad group element {body:?}")));
            }
            let p = Permutation::parse_cycles(body, ctx.degree)?;
            let slot = &mut x.coeffs[p.rank()];
            *slot = ((*slot as u32 + coefficient) % n) as u16;
        }
        Ok(x)
    }
}

pub(crate) fn uniform_residue(modulus: u32) -> Uniform<u16> {
    Uniform::new(0u16, modulus as u16)
}

impl fmt::Display for GroupRingElement {
    /// Terms in rank order, coefficient 1 omitted, identity written `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (r, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            if c != 1 {
                write!(f, "{c}")?;
            }
            write!(f, "{}", self.ctx.perms[r])?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.ctx, self)
    }
}

// Operator forms panic on a context mismatch; the `checked_*` methods report it.
impl Add for &GroupRingElement {
    type Output = GroupRingElement;
    fn add(self, rhs: Self) -> GroupRingElement {
        self.checked_add(rhs).expect("group ring context mismatch")
    }
}

impl Sub for &GroupRingElement {
    type Output = GroupRingElement;
    fn sub(self, rhs: Self) -> GroupRingElement {
        self.checked_sub(rhs).expect("group ring context mismatch")
    }
}

impl Mul for &GroupRingElement {
    type Output = GroupRingElement;
    fn mul(self, rhs: Self) -> GroupRingElement {
        self.checked_mul(rhs).expect("group ring context mismatch")
    }
}

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        self.neg_ref()
    }
}
