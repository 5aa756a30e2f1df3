//! Statistical experiments on powers of random matrices.
//!
//! Every trial draws from its own ChaCha stream `(seed, stream)`, so serial
//! and parallel runs produce the same tables.

use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::matrix::{FixedBase, MatrixGR};
use crate::perm::{factorial, Permutation};
use crate::ring::{GroupRingElement, RingContext};
use crate::stats::{chi_square_uniform, chi_square_uniform_rows, ChiSquare};

/// Default bound on the Q-Q deviation, in binomial standard deviations.
/// Under the null hypothesis the maximum over four 840-cell slices at
/// 500 trials exceeded 2.8 in one of 10^4 simulated runs.
pub const DEFAULT_QQ_THRESHOLD: f64 = 4.0;

/// The RNG for one trial (or for a shared setup step).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentRange {
    pub lo: Exponent,
    pub hi: Exponent,
}

impl ExponentRange {
    pub fn new(lo: Exponent, hi: Exponent) -> Result<Self> {
        if lo.is_zero() {
            return Err(Error::ZeroExponent);
        }
        if lo > hi {
            return Err(Error::Unsupported(format!(
                "empty exponent range [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    fn powers_of_ten(lo: u32, hi: u32) -> Self {
        Self {
            lo: Exponent::pow10(lo),
            hi: Exponent::pow10(hi),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Exponent {
        Exponent::sample_range(&self.lo, &self.hi, rng).expect("validated range")
    }
}

/// `pair` feeds the private exponents `a`, `b`; `wide` feeds exponents meant
/// to be about as large as their product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRanges {
    pub pair: ExponentRange,
    pub wide: ExponentRange,
}

impl ExperimentRanges {
    /// `[10^22, 10^28]` and `[10^44, 10^55]`.
    pub fn full() -> Self {
        Self {
            pair: ExponentRange::powers_of_ten(22, 28),
            wide: ExponentRange::powers_of_ten(44, 55),
        }
    }

    /// `[10^5, 10^7]` and `[10^10, 10^14]`, for quick runs.
    pub fn fast() -> Self {
        Self {
            pair: ExponentRange::powers_of_ten(5, 7),
            wide: ExponentRange::powers_of_ten(10, 14),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: u32,
    pub m: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub ranges: ExperimentRanges,
}

impl ExperimentConfig {
    /// 2×2 matrices over `Z_7[S_5]` with the full-size exponent ranges.
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            n: 7,
            m: 5,
            k: 2,
            trials,
            seed,
            ranges: ExperimentRanges::full(),
        }
    }

    pub fn with_ranges(mut self, ranges: ExperimentRanges) -> Self {
        self.ranges = ranges;
        self
    }

    fn context(&self) -> Result<Arc<RingContext>> {
        if self.trials == 0 {
            return Err(Error::Unsupported("at least one trial is required".into()));
        }
        RingContext::new(self.n, self.m)
    }
}

fn entry_label(entry: usize, k: usize) -> String {
    format!("a{}{}", entry / k + 1, entry % k + 1)
}

fn element_labels(degree: usize) -> Vec<String> {
    (0..factorial(degree))
        .map(|r| {
            Permutation::unrank(degree, r)
                .expect("rank in range")
                .to_string()
        })
        .collect()
}

/// Per (matrix entry, group element) tally of coefficient residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    k: usize,
    degree: usize,
    elements: usize,
    residues: usize,
    counts: Vec<u64>,
    trials: u64,
}

impl FrequencyTable {
    pub fn new(k: usize, degree: usize, residues: u32) -> Self {
        let elements = factorial(degree);
        let residues = residues as usize;
        Self {
            k,
            degree,
            elements,
            residues,
            counts: vec![0; k * k * elements * residues],
            trials: 0,
        }
    }

    fn for_context(ctx: &RingContext, k: usize) -> Self {
        Self::new(k, ctx.degree(), ctx.modulus())
    }

    pub fn record(&mut self, x: &MatrixGR) {
        debug_assert_eq!(x.coeffs().len() * self.residues, self.counts.len());
        for (cell, &c) in x.coeffs().iter().enumerate() {
            self.counts[cell * self.residues + c as usize] += 1;
        }
        self.trials += 1;
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.trials += other.trials;
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn residues(&self) -> usize {
        self.residues
    }

    pub fn entries(&self) -> usize {
        self.k * self.k
    }

    pub fn count(&self, entry: usize, element: usize, residue: usize) -> u64 {
        self.counts[(entry * self.elements + element) * self.residues + residue]
    }

    /// Residue counts of one (entry, element) cell; sums to `trials`.
    pub fn row(&self, entry: usize, element: usize) -> &[u64] {
        let start = (entry * self.elements + element) * self.residues;
        &self.counts[start..start + self.residues]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks_exact(self.residues)
    }

    /// All counts belonging to one matrix entry.
    pub fn entry_slice(&self, entry: usize) -> &[u64] {
        let len = self.elements * self.residues;
        &self.counts[entry * len..(entry + 1) * len]
    }

    /// Total count of each residue over the whole table.
    pub fn residue_marginals(&self) -> Vec<u64> {
        let mut out = vec![0; self.residues];
        for row in self.rows() {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Sum of the per-cell uniformity tests, `cells·(n-1)` degrees of freedom.
    pub fn chi_square(&self) -> Result<ChiSquare> {
        chi_square_uniform_rows(self.rows())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "entry,element,residue,count")?;
        let labels = element_labels(self.degree);
        for entry in 0..self.entries() {
            let e = entry_label(entry, self.k);
            for (element, label) in labels.iter().enumerate() {
                for (residue, c) in self.row(entry, element).iter().enumerate() {
                    writeln!(w, "{e},{label},{residue},{c}")?;
                }
            }
        }
        Ok(())
    }
}

/// Per (entry, element) tally of residue triples taken from three matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleTable {
    k: usize,
    degree: usize,
    elements: usize,
    residues: usize,
    counts: Vec<u64>,
    trials: u64,
}

impl TripleTable {
    pub fn new(k: usize, degree: usize, residues: u32) -> Self {
        let elements = factorial(degree);
        let residues = residues as usize;
        let width = residues.pow(3);
        Self {
            k,
            degree,
            elements,
            residues,
            counts: vec![0; k * k * elements * width],
            trials: 0,
        }
    }

    fn width(&self) -> usize {
        self.residues.pow(3)
    }

    pub fn record(&mut self, x: &MatrixGR, y: &MatrixGR, z: &MatrixGR) {
        let (n, width) = (self.residues, self.width());
        for (cell, ((&a, &b), &c)) in x
            .coeffs()
            .iter()
            .zip(y.coeffs())
            .zip(z.coeffs())
            .enumerate()
        {
            let triple = (a as usize * n + b as usize) * n + c as usize;
            self.counts[cell * width + triple] += 1;
        }
        self.trials += 1;
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.trials += other.trials;
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn entries(&self) -> usize {
        self.k * self.k
    }

    /// Triple counts of one (entry, element) cell; sums to `trials`.
    pub fn row(&self, entry: usize, element: usize) -> &[u64] {
        let width = self.width();
        let start = (entry * self.elements + element) * width;
        &self.counts[start..start + width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks_exact(self.width())
    }

    /// Counts of each triple summed over all cells.
    pub fn pooled(&self) -> Vec<u64> {
        let mut out = vec![0; self.width()];
        for row in self.rows() {
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Mean count per (cell, triple), which is `trials / n³`.
    pub fn mean_count(&self) -> f64 {
        self.trials as f64 / self.width() as f64
    }

    /// Uniformity of the pooled triple counts, `n³ - 1` degrees of freedom.
    pub fn chi_square(&self) -> Result<ChiSquare> {
        chi_square_uniform(&self.pooled())
    }

    /// Sum of per-cell triple tests; needs `trials >= 5·n³`.
    pub fn chi_square_rows(&self) -> Result<ChiSquare> {
        chi_square_uniform_rows(self.rows())
    }

    pub fn triple_label(&self, triple: usize) -> String {
        let n = self.residues;
        let (a, b, c) = (triple / (n * n), triple / n % n, triple % n);
        if n <= 10 {
            format!("{a}{b}{c}")
        } else {
            format!("{a}.{b}.{c}")
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "entry,element,triple,count")?;
        let labels = element_labels(self.degree);
        let triples: Vec<String> = (0..self.width()).map(|t| self.triple_label(t)).collect();
        for entry in 0..self.entries() {
            let e = entry_label(entry, self.k);
            for (element, label) in labels.iter().enumerate() {
                for (t, c) in triples.iter().zip(self.row(entry, element)) {
                    writeln!(w, "{e},{label},{t},{c}")?;
                }
            }
        }
        Ok(())
    }
}

/// Sorted counts of one matrix entry from two tables, paired by index.
#[derive(Clone, Debug, PartialEq)]
pub struct QqSlice {
    pub entry: usize,
    pub pairs: Vec<(u64, u64)>,
}

impl QqSlice {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y")?;
        for (x, y) in &self.pairs {
            writeln!(w, "{x},{y}")?;
        }
        Ok(())
    }
}

fn check_same_shape(a: &FrequencyTable, b: &FrequencyTable) -> Result<()> {
    if (a.k, a.degree, a.residues) != (b.k, b.degree, b.residues) {
        return Err(Error::Statistics(
            "frequency tables have different dimensions".into(),
        ));
    }
    Ok(())
}

pub fn qq_pairs(a: &FrequencyTable, b: &FrequencyTable) -> Result<Vec<QqSlice>> {
    check_same_shape(a, b)?;
    Ok((0..a.entries())
        .map(|entry| {
            let mut x = a.entry_slice(entry).to_vec();
            let mut y = b.entry_slice(entry).to_vec();
            x.sort_unstable();
            y.sort_unstable();
            QqSlice {
                entry,
                pairs: x.into_iter().zip(y).collect(),
            }
        })
        .collect())
}

/// Largest distance from `y = x` after scaling both tables to frequencies,
/// in units of one cell's binomial standard deviation.
pub fn qq_max_deviation(a: &FrequencyTable, b: &FrequencyTable) -> Result<f64> {
    check_same_shape(a, b)?;
    if a.trials == 0 || b.trials == 0 {
        return Err(Error::Statistics("empty table".into()));
    }
    let q = 1.0 / a.residues as f64;
    let sd = (q * (1.0 - q) / a.trials.min(b.trials) as f64).sqrt();
    let (ta, tb) = (a.trials as f64, b.trials as f64);
    let worst = qq_pairs(a, b)?
        .iter()
        .flat_map(|s| s.pairs.iter())
        .map(|&(x, y)| (x as f64 / ta - y as f64 / tb).abs())
        .fold(0.0, f64::max);
    Ok(worst / sd)
}

/// Two frequency tables collected side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedTables {
    pub first: FrequencyTable,
    pub second: FrequencyTable,
}

#[derive(Clone, Debug)]
pub struct PairedVerdict {
    pub first: ChiSquare,
    pub second: ChiSquare,
    pub qq_deviation: f64,
    pub passed: bool,
}

impl PairedTables {
    pub fn verdict(&self, alpha: f64, qq_threshold: f64) -> Result<PairedVerdict> {
        let first = self.first.chi_square()?;
        let second = self.second.chi_square()?;
        let qq_deviation = qq_max_deviation(&self.first, &self.second)?;
        let passed = first.passes(alpha) && second.passes(alpha) && qq_deviation < qq_threshold;
        Ok(PairedVerdict {
            first,
            second,
            qq_deviation,
            passed,
        })
    }

    fn merge(self, other: &Self) -> Self {
        Self {
            first: self.first.merge(&other.first),
            second: self.second.merge(&other.second),
        }
    }
}

fn run_paired<F>(cfg: &ExperimentConfig, trial: F) -> Result<PairedTables>
where
    F: Fn(&mut ChaCha8Rng) -> (MatrixGR, MatrixGR) + Sync,
{
    let ctx = cfg.context()?;
    let empty = PairedTables {
        first: FrequencyTable::for_context(&ctx, cfg.k),
        second: FrequencyTable::for_context(&ctx, cfg.k),
    };
    Ok((0..cfg.trials)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut acc, t| {
                let (x, y) = trial(&mut stream_rng(cfg.seed, t + 1));
                acc.first.record(&x);
                acc.second.record(&y);
                acc
            },
        )
        .reduce(|| empty.clone(), |a, b| a.merge(&b)))
}

/// `M^{ab}` against `M^c`: fresh `M`, `a`, `b` from the pair range and `c`
/// from the wide range in every trial.
pub fn exp_ddh_product(cfg: &ExperimentConfig) -> Result<PairedTables> {
    let ctx = cfg.context()?;
    run_paired(cfg, |rng| {
        let m = MatrixGR::random(&ctx, cfg.k, rng);
        let a = cfg.ranges.pair.sample(rng);
        let b = cfg.ranges.pair.sample(rng);
        let c = cfg.ranges.wide.sample(rng);
        let mut powers = m.pow_many(&[&(&a * &b), &c]);
        let mc = powers.pop().expect("two powers");
        (powers.pop().expect("two powers"), mc)
    })
}

/// What the second arm of [`exp_uniformity`] tallies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Reference {
    /// A fresh uniform matrix `N`.
    #[default]
    Random,
    /// A copy of `M^a`; both tables must then agree exactly.
    CopyOfPower,
}

/// `M^a` against an independent uniform `N`, with `a` from the wide range.
pub fn exp_uniformity(cfg: &ExperimentConfig, reference: Reference) -> Result<PairedTables> {
    let ctx = cfg.context()?;
    run_paired(cfg, |rng| {
        let m = MatrixGR::random(&ctx, cfg.k, rng);
        let a = cfg.ranges.wide.sample(rng);
        let ma = m.pow(&a);
        let n = match reference {
            Reference::Random => MatrixGR::random(&ctx, cfg.k, rng),
            Reference::CopyOfPower => ma.clone(),
        };
        (ma, n)
    })
}

/// Where [`exp_triples`] gets its fixed base matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BaseMode {
    /// One base per seed, shared by every batch.
    #[default]
    Shared,
    /// A different base for each batch.
    PerBatch,
}

/// The fixed base used by batch `batch` of [`exp_triples`].
pub fn triple_base(cfg: &ExperimentConfig, mode: BaseMode, batch: u64) -> Result<MatrixGR> {
    let ctx = cfg.context()?;
    let stream = match mode {
        BaseMode::Shared => 0,
        BaseMode::PerBatch => u64::MAX - batch,
    };
    Ok(MatrixGR::random(
        &ctx,
        cfg.k,
        &mut stream_rng(cfg.seed, stream),
    ))
}

/// Residue triples of `(M^a, M^b, M^{ab})` for a fixed `M` and fresh `a`, `b`
/// from the pair range. Batches draw from disjoint trial streams.
pub fn exp_triples(cfg: &ExperimentConfig, mode: BaseMode, batch: u64) -> Result<TripleTable> {
    let ctx = cfg.context()?;
    let base = triple_base(cfg, mode, batch)?;
    let table = FixedBase::new(&base, 2 * cfg.ranges.pair.hi.bits());
    let empty = TripleTable::new(cfg.k, ctx.degree(), ctx.modulus());
    let first_stream = 1 + batch * cfg.trials;
    Ok((0..cfg.trials)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut acc, t| {
                let mut rng = stream_rng(cfg.seed, first_stream + t);
                let a = cfg.ranges.pair.sample(&mut rng);
                let b = cfg.ranges.pair.sample(&mut rng);
                let ab = &a * &b;
                acc.record(&table.pow(&a), &table.pow(&b), &table.pow(&ab));
                acc
            },
        )
        .reduce(|| empty.clone(), |a, b| a.merge(&b)))
}

/// Histogram of support sizes of `samples` uniform elements of `ctx`.
pub fn support_histogram(ctx: &Arc<RingContext>, samples: u64, seed: u64) -> Vec<u64> {
    let mut rng = stream_rng(seed, 0);
    let mut hist = vec![0u64; ctx.order() + 1];
    for _ in 0..samples {
        hist[GroupRingElement::random(ctx, &mut rng).support_size()] += 1;
    }
    hist
}

/// Fraction of samples whose support size lies in `[lo, hi]`.
pub fn support_fraction(hist: &[u64], lo: usize, hi: usize) -> f64 {
    let total: u64 = hist.iter().sum();
    let inside: u64 = hist.iter().take(hi + 1).skip(lo).sum();
    inside as f64 / total as f64
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
