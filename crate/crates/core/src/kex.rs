//! Diffie-Hellman style exchange on powers of a public matrix.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matrix::MatrixGR;
use crate::ring::RingContext;
use crate::structured::{random_invertible, scalar_s, INVERTIBLE_FACTORS};

const MAGIC: &[u8; 4] = b"GRK1";
const HEADER_LEN: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KexParams {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    pub exp_lo: Exponent,
    pub exp_hi: Exponent,
}

impl Default for KexParams {
    fn default() -> Self {
        Self {
            n: 7,
            m: 5,
            k: 3,
            exp_lo: Exponent::pow10(22),
            exp_hi: Exponent::pow10(28),
        }
    }
}

impl KexParams {
    pub fn new(n: u32, m: usize, k: usize) -> Self {
        Self {
            n,
            m,
            k,
            ..Self::default()
        }
    }

    pub fn with_range(mut self, lo: Exponent, hi: Exponent) -> Self {
        self.exp_lo = lo;
        self.exp_hi = hi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.exp_lo.is_zero() {
            return Err(Error::ZeroExponent);
        }
        if self.exp_lo > self.exp_hi {
            return Err(Error::Unsupported(format!(
                "empty exponent range [{}, {}]",
                self.exp_lo, self.exp_hi
            )));
        }
        if !(1..=crate::matrix::MAX_DIM).contains(&self.k) {
            return Err(Error::Unsupported(format!("matrix dimension {}", self.k)));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<Arc<RingContext>> {
        RingContext::new(self.n, self.m)
    }

    fn check_matrix(&self, x: &MatrixGR) -> Result<()> {
        let ctx = x.context();
        if ctx.modulus() != self.n || ctx.degree() != self.m {
            return Err(Error::ContextMismatch(
                self.n,
                self.m,
                ctx.modulus(),
                ctx.degree(),
            ));
        }
        if x.dim() != self.k {
            return Err(Error::ShapeMismatch(self.k, x.dim()));
        }
        Ok(())
    }
}

/// Private exponent drawn uniformly from `[exp_lo, exp_hi]`.
pub fn sample_exponent<R: Rng + ?Sized>(params: &KexParams, rng: &mut R) -> Result<Exponent> {
    params.validate()?;
    Exponent::sample_range(&params.exp_lo, &params.exp_hi, rng)
}

/// `base^a`, the value a party publishes.
pub fn public_key(base: &MatrixGR, a: &Exponent) -> Result<MatrixGR> {
    if a.is_zero() {
        return Err(Error::ZeroExponent);
    }
    Ok(base.pow(a))
}

/// `peer^a`; equals `base^(a·b)` when `peer = base^b`.
pub fn shared_secret(params: &KexParams, peer_public: &MatrixGR, a: &Exponent) -> Result<MatrixGR> {
    params.check_matrix(peer_public)?;
    public_key(peer_public, a)
}

/// How the public base matrix is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BaseKind {
    /// Every coefficient uniform.
    #[default]
    Random,
    /// A random invertible matrix times the scalar matrix `S`; only over `Z_7[S_5]`.
    Structured,
}

pub fn sample_base<R: Rng + ?Sized>(
    params: &KexParams,
    kind: BaseKind,
    rng: &mut R,
) -> Result<MatrixGR> {
    params.validate()?;
    let ctx = params.context()?;
    match kind {
        BaseKind::Random => Ok(MatrixGR::random(&ctx, params.k, rng)),
        BaseKind::Structured => {
            let s = scalar_s(&ctx, params.k)?;
            let (m1, _) = random_invertible(&ctx, params.k, INVERTIBLE_FACTORS, rng)?;
            Ok(&m1 * &s)
        }
    }
}

/// One party's view of an exchange.
pub struct KexSession {
    params: KexParams,
    base: MatrixGR,
    exponent: Exponent,
    public: MatrixGR,
    shared: Option<MatrixGR>,
}

impl KexSession {
    /// Samples a private exponent and computes the public key for `base`.
    pub fn new<R: Rng + ?Sized>(params: KexParams, base: MatrixGR, rng: &mut R) -> Result<Self> {
        let exponent = sample_exponent(&params, rng)?;
        Self::with_exponent(params, base, exponent)
    }

    pub fn with_exponent(params: KexParams, base: MatrixGR, exponent: Exponent) -> Result<Self> {
        params.validate()?;
        params.check_matrix(&base)?;
        let public = public_key(&base, &exponent)?;
        Ok(Self {
            params,
            base,
            exponent,
            public,
            shared: None,
        })
    }

    pub fn params(&self) -> &KexParams {
        &self.params
    }

    pub fn base(&self) -> &MatrixGR {
        &self.base
    }

    pub fn public(&self) -> &MatrixGR {
        &self.public
    }

    pub fn exponent(&self) -> &Exponent {
        &self.exponent
    }

    /// Derives and stores the shared matrix from the peer's public key.
    pub fn complete(&mut self, peer_public: &MatrixGR) -> Result<&MatrixGR> {
        let k = shared_secret(&self.params, peer_public, &self.exponent)?;
        Ok(self.shared.insert(k))
    }

    pub fn shared(&self) -> Option<&MatrixGR> {
        self.shared.as_ref()
    }
}

/// `GRK1`, then `n`, `m`, `k` as big-endian `u16`, then the matrix payload.
pub fn key_encode(x: &MatrixGR) -> Vec<u8> {
    let ctx = x.context();
    let mut out = Vec::with_capacity(HEADER_LEN + MatrixGR::encoded_len(ctx, x.dim()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(ctx.modulus() as u16).to_be_bytes());
    out.extend_from_slice(&(ctx.degree() as u16).to_be_bytes());
    out.extend_from_slice(&(x.dim() as u16).to_be_bytes());
    out.extend_from_slice(&x.encode());
    out
}

/// Parses a key file. The returned parameters carry the default exponent range.
pub fn key_decode(bytes: &[u8]) -> Result<(MatrixGR, KexParams)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::KeyFile(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::KeyFile("bad magic".into()));
    }
    let field = |i: usize| u16::from_be_bytes([bytes[4 + 2 * i], bytes[5 + 2 * i]]);
    let (n, m, k) = (field(0) as u32, field(1) as usize, field(2) as usize);
    let params = KexParams::new(n, m, k);
    params
        .validate()
        .map_err(|e| Error::KeyFile(e.to_string()))?;
    let ctx = params
        .context()
        .map_err(|e| Error::KeyFile(e.to_string()))?;
    let payload = &bytes[HEADER_LEN..];
    let expected = MatrixGR::encoded_len(&ctx, k);
    if payload.len() != expected {
        return Err(Error::KeyFile(format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    Ok((MatrixGR::decode(payload, &ctx, k)?, params))
}

/// Lowercase hex of [`key_encode`].
pub fn key_to_hex(x: &MatrixGR) -> String {
    hex::encode(key_encode(x))
}

pub fn key_from_hex(text: &str) -> Result<(MatrixGR, KexParams)> {
    let bytes =
        hex::decode(text.trim()).map_err(|e| Error::KeyFile(format!("invalid hex: {e}")))?;
    key_decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn defaults() {
        let p = KexParams::default();
        assert_eq!((p.n, p.m, p.k), (7, 5, 3));
        assert_eq!(p.exp_lo, Exponent::pow10(22));
        assert_eq!(p.exp_hi, Exponent::pow10(28));
    }

    #[test]
    fn exchange_agrees() {
        for (n, k) in [(7, 2), (7, 3), (2, 2), (2, 3)] {
            let params = KexParams::new(n, 5, k);
            let mut r = rng(n as u64 * 10 + k as u64);
            for _ in 0..3 {
                let base = sample_base(&params, BaseKind::Random, &mut r).unwrap();
                let mut alice = KexSession::new(params.clone(), base.clone(), &mut r).unwrap();
                let mut bob = KexSession::new(params.clone(), base.clone(), &mut r).unwrap();
                let ka = alice.complete(&bob.public().clone()).unwrap().encode();
                let kb = bob.complete(&alice.public().clone()).unwrap().encode();
                assert_eq!(ka, kb);
                let product = alice.exponent() * bob.exponent();
                assert_eq!(base.pow(&product).encode(), ka);
            }
        }
    }

    #[test]
    fn structured_base_exchange() {
        let params = KexParams::new(7, 5, 2);
        let mut r = rng(5);
        let base = sample_base(&params, BaseKind::Structured, &mut r).unwrap();
        let a = sample_exponent(&params, &mut r).unwrap();
        let b = sample_exponent(&params, &mut r).unwrap();
        let (pa, pb) = (
            public_key(&base, &a).unwrap(),
            public_key(&base, &b).unwrap(),
        );
        assert_eq!(
            shared_secret(&params, &pb, &a).unwrap(),
            shared_secret(&params, &pa, &b).unwrap()
        );
        assert!(sample_base(&KexParams::new(5, 5, 2), BaseKind::Structured, &mut r).is_err());
    }

    #[test]
    fn equal_exponents_give_square() {
        let params = KexParams::new(7, 5, 2);
        let base = MatrixGR::random(&params.context().unwrap(), 2, &mut rng(6));
        let a = Exponent::from(123_456_789);
        let pa = public_key(&base, &a).unwrap();
        assert_eq!(
            shared_secret(&params, &pa, &a).unwrap(),
            base.pow(&(&a * &a))
        );
    }

    #[test]
    fn exponent_and_shape_errors() {
        let params = KexParams::new(7, 5, 2);
        let ctx = params.context().unwrap();
        let base = MatrixGR::random(&ctx, 2, &mut rng(7));
        assert_eq!(public_key(&base, &Exponent::one()).unwrap(), base);
        assert!(matches!(
            public_key(&base, &Exponent::zero()),
            Err(Error::ZeroExponent)
        ));
        let wrong = MatrixGR::identity(&ctx, 3);
        assert!(shared_secret(&params, &wrong, &Exponent::one()).is_err());
        let bad = KexParams::new(7, 5, 2).with_range(Exponent::zero(), Exponent::from(5));
        assert!(sample_exponent(&bad, &mut rng(0)).is_err());
    }

    #[test]
    fn degenerate_exponent_range() {
        let params = KexParams::new(7, 5, 2).with_range(Exponent::from(5), Exponent::from(5));
        let mut r = rng(8);
        for _ in 0..10 {
            assert_eq!(sample_exponent(&params, &mut r).unwrap(), Exponent::from(5));
        }
    }

    #[test]
    fn key_file_layout() {
        let ctx = RingContext::new(7, 5).unwrap();
        let x = MatrixGR::random(&ctx, 2, &mut rng(9));
        let bytes = key_encode(&x);
        assert_eq!(bytes.len(), 190);
        assert_eq!(&bytes[..10], b"GRK1\x00\x07\x00\x05\x00\x02");
        let (y, params) = key_decode(&bytes).unwrap();
        assert_eq!(y, x);
        assert_eq!((params.n, params.m, params.k), (7, 5, 2));

        let hex = key_to_hex(&x);
        assert_eq!(hex.len(), 380);
        assert!(hex
            .bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)));
        assert_eq!(key_from_hex(&hex).unwrap().0, x);
    }

    #[test]
    fn key_file_errors() {
        let ctx = RingContext::new(7, 5).unwrap();
        let bytes = key_encode(&MatrixGR::random(&ctx, 2, &mut rng(10)));
        let mut flipped = bytes.clone();
        flipped[0] ^= 1;
        assert!(matches!(key_decode(&flipped), Err(Error::KeyFile(_))));
        assert!(key_decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(key_decode(&bytes[..6]).is_err());
        let mut unsupported = bytes.clone();
        unsupported[7] = 0; // m = 0
        assert!(key_decode(&unsupported).is_err());
        let mut no_dim = bytes;
        no_dim[9] = 0; // k = 0
        assert!(key_decode(&no_dim).is_err());
        assert!(key_from_hex("abc").is_err());
        assert!(key_from_hex("zz").is_err());
    }

    #[test]
    fn public_keys_do_not_collide() {
        let params = KexParams::new(7, 5, 2).with_range(Exponent::from(1), Exponent::pow10(9));
        let ctx = params.context().unwrap();
        let mut seen = HashSet::new();
        for seed in 0..10_000u64 {
            let mut r = rng(seed);
            let base = MatrixGR::random(&ctx, 2, &mut r);
            let a = sample_exponent(&params, &mut r).unwrap();
            seen.insert(key_encode(&public_key(&base, &a).unwrap()));
        }
        assert_eq!(seen.len(), 10_000, "{} distinct", seen.len());
    }
}
