//! Goodness-of-fit tests and exact binomial tail sums.

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::perm::factorial;

/// Smallest expected cell count for which the chi-square approximation is used.
pub const MIN_EXPECTED: f64 = 5.0;
/// Default significance level for the uniformity decision rule.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquare {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }

    /// Combines independent tests by adding statistics and degrees of freedom.
    pub fn combine(parts: &[ChiSquare]) -> Result<Self> {
        let statistic = parts.iter().map(|c| c.statistic).sum();
        let dof = parts.iter().map(|c| c.dof).sum();
        Ok(Self {
            statistic,
            dof,
            p_value: survival(statistic, dof)?,
        })
    }
}

fn survival(statistic: f64, dof: u64) -> Result<f64> {
    if statistic <= 0.0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Statistics(e.to_string()))?;
    Ok(dist.sf(statistic))
}

/// Pearson's test of `counts` against equal cell probabilities.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquare> {
    if counts.len() < 2 {
        return Err(Error::Statistics("need at least two cells".into()));
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    if expected < MIN_EXPECTED {
        return Err(Error::Statistics(format!(
            "expected count {expected:.3} per cell is below {MIN_EXPECTED}"
        )));
    }
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = counts.len() as u64 - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: survival(statistic, dof)?,
    })
}

/// Sum of independent per-row uniformity tests.
pub fn chi_square_uniform_rows<'a>(rows: impl IntoIterator<Item = &'a [u64]>) -> Result<ChiSquare> {
    let parts = rows
        .into_iter()
        .map(chi_square_uniform)
        .collect::<Result<Vec<_>>>()?;
    if parts.is_empty() {
        return Err(Error::Statistics("no rows".into()));
    }
    ChiSquare::combine(&parts)
}

/// Exact `P(lo <= X <= hi)` for `X ~ Binomial(m!, 1 - 1/n)`, the number of
/// nonzero coefficients of a uniform element of `Z_n[S_m]`, as a numerator
/// over the denominator `n^(m!)`.
pub fn binom_support_ratio(m: usize, n: u32, lo: usize, hi: usize) -> Result<(BigUint, BigUint)> {
    let trials = factorial(m);
    if n < 2 {
        return Err(Error::Unsupported(format!("modulus {n}")));
    }
    if lo > hi || hi > trials {
        return Err(Error::Statistics(format!(
            "bad support range [{lo}, {hi}] for {trials} cells"
        )));
    }
    let nonzero = BigUint::from(n - 1);
    let total = BigUint::from(trials);
    let mut numerator = BigUint::zero();
    for x in lo..=hi {
        numerator += binomial(total.clone(), BigUint::from(x)) * nonzero.pow(x as u32);
    }
    let denominator = BigUint::from(n).pow(trials as u32);
    Ok((numerator, denominator))
}

pub fn binom_support_prob(m: usize, n: u32, lo: usize, hi: usize) -> Result<f64> {
    let (num, den) = binom_support_ratio(m, n, lo, hi)?;
    Ok(ratio_to_f64(&num, &den))
}

// Callers pass probabilities, so `num <= den` and the scaled quotient fits 128 bits.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let scaled: BigUint = (num << 128u32) / den;
    scaled.to_f64().unwrap_or(f64::NAN) / 2f64.powi(128)
}
