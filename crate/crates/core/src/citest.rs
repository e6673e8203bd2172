//! Conditional-independence tests for discrete data.
//!
//! Every test consumes a [`StratifiedTable`] of counts `n_ijk` for the tested
//! pair `(X, Y)` across the observed configurations `k` of the conditioning
//! set. Three families share the table:
//!
//! * asymptotic tests: `G² = 2n·MI` and Pearson's `X²`, referred to a χ²
//!   distribution with `(R − 1)(C − 1)L` degrees of freedom;
//! * conditional Monte Carlo permutation tests: each stratum is resampled with
//!   both of its margins held fixed and the p-value is the fraction of
//!   replicates whose statistic reaches the observed one;
//! * the shrinkage mutual information test, which replaces the cell
//!   frequencies with `λ·t + (1 − λ)·p̂` before computing the statistic.
//!
//! All logarithms are natural. Empty cells contribute `0·log 0 = 0` and cells
//! with zero expected count are skipped. A table with a single row or column
//! level has zero degrees of freedom and is reported as independent
//! (statistic 0, p-value 1).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{stratify, DiscreteDataset, StratifiedTable, StratumView};
use crate::error::{Error, Result};
use crate::math::{log, xlogx};
use crate::rng;

pub use crate::math::chisq_survival;

/// Mutual information values below this are treated as rounding noise.
const MI_NOISE_FLOOR: f64 = 1e-14;

/// Relative tolerance used when comparing a permuted statistic with the
/// observed one, so that tables with equal statistics compare equal despite
/// different summation order.
const TIE_TOLERANCE: f64 = 1e-11;

/// Default number of Monte Carlo replicates.
pub const DEFAULT_PERMUTATIONS: u32 = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Mi,
    X2,
    MiPerm,
    X2Perm,
    MiShrink,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mi,
        Method::X2,
        Method::MiPerm,
        Method::X2Perm,
        Method::MiShrink,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Mi => "mi",
            Method::X2 => "x2",
            Method::MiPerm => "mi_perm",
            Method::X2Perm => "x2_perm",
            Method::MiShrink => "mi_shrink",
        }
    }

    /// The statistic the method is built on.
    pub fn statistic(self) -> Statistic {
        match self {
            Method::X2 | Method::X2Perm => Statistic::X2,
            Method::Mi | Method::MiPerm | Method::MiShrink => Statistic::Mi,
        }
    }

    pub fn is_permutation(self) -> bool {
        matches!(self, Method::MiPerm | Method::X2Perm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown test method {s:?}")))
    }
}

/// Test statistic shared by the asymptotic and permutation engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Log-likelihood ratio `G² = 2n·MI`.
    Mi,
    /// Pearson's `X²`.
    X2,
}

impl Statistic {
    pub fn evaluate(self, tab: &StratifiedTable) -> f64 {
        match self {
            Statistic::Mi => g2_statistic(tab),
            Statistic::X2 => pearson_x2(tab),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    pub method: Method,
    pub permutations_used: Option<u32>,
    pub lambda: Option<f64>,
}

impl TestOutcome {
    fn degenerate(method: Method) -> Self {
        Self {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
            method,
            permutations_used: None,
            lambda: None,
        }
    }
}

/// Shrinkage target distribution over the `R·C·L` cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ShrinkageTarget {
    #[default]
    Uniform,
    /// Explicit probabilities in table storage order.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShrinkageSpec {
    pub target: ShrinkageTarget,
    pub lambda_override: Option<f64>,
}

impl ShrinkageSpec {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { target: ShrinkageTarget::Uniform, lambda_override: Some(lambda) }
    }

    fn validate(&self, cells: usize) -> Result<()> {
        if let Some(l) = self.lambda_override {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Config(format!("lambda override {l} outside [0, 1]")));
            }
        }
        if let ShrinkageTarget::Explicit(t) = &self.target {
            if t.len() != cells {
                return Err(Error::Config(format!(
                    "shrinkage target has {} entries, table has {cells} cells",
                    t.len()
                )));
            }
            if t.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::Config("shrinkage target has negative entries".into()));
            }
            let total: f64 = t.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("shrinkage target sums to {total}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationPlan {
    pub replicates: u32,
    pub seed: u64,
}

impl PermutationPlan {
    pub fn new(replicates: u32, seed: u64) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::Config("permutation count must be at least 1".into()));
        }
        Ok(Self { replicates, seed })
    }
}

/// Parameters of a single test invocation. The significance threshold is
/// applied by callers.
#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub method: Method,
    pub permutations: u32,
    pub seed: u64,
    pub shrinkage: ShrinkageSpec,
}

impl TestConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
            shrinkage: ShrinkageSpec::default(),
        }
    }

    pub fn with_permutations(mut self, permutations: u32) -> Self {
        self.permutations = permutations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Weighted mutual information `Σ (w/W) log(w·w_++k / (w_i+k·w_+jk))`.
///
/// With integer counts as weights this is the sample mutual information; the
/// shrinkage test passes `n·p̃` so both share one code path.
fn weighted_mi(rows: usize, cols: usize, strata: usize, w: &[f64]) -> f64 {
    let size = rows * cols;
    let mut row_m = vec![0.0; rows];
    let mut col_m = vec![0.0; cols];
    let mut acc = 0.0;
    let mut grand = 0.0;
    for k in 0..strata {
        let cell = &w[k * size..(k + 1) * size];
        row_m.iter_mut().for_each(|x| *x = 0.0);
        col_m.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..rows {
            for j in 0..cols {
                row_m[i] += cell[i * cols + j];
                col_m[j] += cell[i * cols + j];
            }
        }
        let total: f64 = row_m.iter().sum();
        grand += total;
        for i in 0..rows {
            for j in 0..cols {
                let v = cell[i * cols + j];
                if v > 0.0 {
                    acc += v * log(v * total / (row_m[i] * col_m[j]));
                }
            }
        }
    }
    if grand <= 0.0 {
        return 0.0;
    }
    let mi = acc / grand;
    if mi < MI_NOISE_FLOOR {
        0.0
    } else {
        mi
    }
}

/// Sample mutual information of `X` and `Y` given the strata, in nats.
pub fn mutual_information(tab: &StratifiedTable) -> f64 {
    let w: Vec<f64> = tab.counts().iter().map(|&c| c as f64).collect();
    weighted_mi(tab.rows(), tab.cols(), tab.strata(), &w)
}

/// Log-likelihood ratio statistic `G² = 2n·MI`.
pub fn g2_statistic(tab: &StratifiedTable) -> f64 {
    2.0 * tab.n() as f64 * mutual_information(tab)
}

fn stratum_x2(s: &StratumView<'_>) -> f64 {
    let mut acc = 0.0;
    for i in 0..s.rows {
        for j in 0..s.cols {
            let m = s.expected(i, j);
            if m > 0.0 {
                let d = s.count(i, j) as f64 - m;
                acc += d * d / m;
            }
        }
    }
    acc
}

/// Pearson's `X²` summed over strata.
pub fn pearson_x2(tab: &StratifiedTable) -> f64 {
    tab.iter_strata().map(|s| stratum_x2(&s)).sum()
}

/// Asymptotic χ² test on `G²` or `X²`.
pub fn asymptotic_test(tab: &StratifiedTable, stat: Statistic) -> Result<TestOutcome> {
    let method = match stat {
        Statistic::Mi => Method::Mi,
        Statistic::X2 => Method::X2,
    };
    let df = tab.df();
    if df == 0 {
        return Ok(TestOutcome::degenerate(method));
    }
    let statistic = stat.evaluate(tab);
    Ok(TestOutcome {
        statistic,
        df,
        p_value: chisq_survival(statistic, df)?,
        method,
        permutations_used: None,
        lambda: None,
    })
}

/// Per-stratum resampling state: the column-label urn and the row segments it
/// is dealt into.
struct StratumSampler {
    offset: usize,
    rows: usize,
    cols: usize,
    col_margins: Vec<u64>,
    /// Rows dealt from the urn in order, with their sizes; the largest row is
    /// left out and receives the remainder.
    dealt: Vec<(usize, usize)>,
    rest_row: usize,
    urn: Vec<u32>,
}

impl StratumSampler {
    fn new(view: &StratumView<'_>, offset: usize) -> Self {
        let rest_row = (0..view.rows)
            .max_by_key(|&i| (view.row_margins[i], core::cmp::Reverse(i)))
            .unwrap_or(0);
        let dealt = (0..view.rows)
            .filter(|&i| i != rest_row)
            .map(|i| (i, view.row_margins[i] as usize))
            .collect();
        let mut urn = Vec::with_capacity(view.total as usize);
        for (j, &m) in view.col_margins.iter().enumerate() {
            urn.extend(core::iter::repeat(j as u32).take(m as usize));
        }
        Self {
            offset,
            rows: view.rows,
            cols: view.cols,
            col_margins: view.col_margins.clone(),
            dealt,
            rest_row,
            urn,
        }
    }

    fn is_fixed(&self) -> bool {
        self.rows < 2 || self.cols < 2 || self.dealt.iter().all(|&(_, m)| m == 0)
    }

    /// Writes a uniformly drawn table with the stratum's margins into `out`.
    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [u64]) {
        let cols = self.cols;
        let taken: usize = self.dealt.iter().map(|&(_, m)| m).sum();
        let (sample, _) = self.urn.partial_shuffle(rng, taken);
        let mut rest = self.col_margins.clone();
        let mut pos = 0;
        for &(i, m) in &self.dealt {
            let row = &mut out[i * cols..(i + 1) * cols];
            row.iter_mut().for_each(|c| *c = 0);
            for &j in &sample[pos..pos + m] {
                row[j as usize] += 1;
                rest[j as usize] -= 1;
            }
            pos += m;
        }
        out[self.rest_row * cols..(self.rest_row + 1) * cols].copy_from_slice(&rest);
    }
}

/// Draws a table uniformly from those sharing the stratum's row and column
/// margins, by dealing a shuffled sequence of column labels into the rows.
pub fn permute_stratum<R: Rng + ?Sized>(view: &StratumView<'_>, rng: &mut R) -> Vec<u64> {
    let mut out = view.counts.to_vec();
    let mut sampler = StratumSampler::new(view, 0);
    if !sampler.is_fixed() {
        sampler.draw(rng, &mut out);
    }
    out
}

/// Evaluates a monotone transform of the statistic that only depends on the
/// cells, given margins fixed per stratum. Used so that the observed and the
/// permuted statistics go through identical arithmetic.
struct FixedMarginStatistic {
    stat: Statistic,
    size: usize,
    /// `x·log x` for `x = 0..=max stratum total`.
    xlogx: Vec<f64>,
    /// `n_++k / (n_i+k·n_+jk)` per cell, zero where the expected count is 0.
    x2_weights: Vec<f64>,
}

impl FixedMarginStatistic {
    fn new(tab: &StratifiedTable, stat: Statistic) -> Self {
        let size = tab.rows() * tab.cols();
        let max_total = tab.iter_strata().map(|s| s.total).max().unwrap_or(0);
        let xlogx_table = match stat {
            Statistic::Mi => (0..=max_total).map(|x| xlogx(x as f64)).collect(),
            Statistic::X2 => Vec::new(),
        };
        let mut x2_weights = Vec::new();
        if stat == Statistic::X2 {
            x2_weights = vec![0.0; tab.counts().len()];
            for s in tab.iter_strata() {
                for i in 0..s.rows {
                    for j in 0..s.cols {
                        let denom = s.row_margins[i] * s.col_margins[j];
                        if denom > 0 {
                            x2_weights[s.k * size + i * s.cols + j] =
                                s.total as f64 / denom as f64;
                        }
                    }
                }
            }
        }
        Self { stat, size, xlogx: xlogx_table, x2_weights }
    }

    fn eval(&self, counts: &[u64]) -> f64 {
        match self.stat {
            // G²/2 minus margin terms that are constant under the resampling.
            Statistic::Mi => counts.iter().map(|&c| self.xlogx[c as usize]).sum(),
            // X² + n, since Σ (n − m)²/m = Σ n²/m − n_++k per stratum.
            Statistic::X2 => counts
                .chunks(self.size)
                .enumerate()
                .map(|(k, cell)| {
                    let w = &self.x2_weights[k * self.size..(k + 1) * self.size];
                    cell.iter()
                        .zip(w)
                        .map(|(&c, &w)| (c * c) as f64 * w)
                        .sum::<f64>()
                })
                .sum(),
        }
    }
}

/// Conditional Monte Carlo permutation test.
///
/// Replicate `r` resamples every stratum from the ChaCha stream `r` of the
/// plan seed; the p-value is `#{r : T*_r ≥ T} / R`.
pub fn permutation_test(
    tab: &StratifiedTable,
    stat: Statistic,
    plan: PermutationPlan,
) -> Result<TestOutcome> {
    let plan = PermutationPlan::new(plan.replicates, plan.seed)?;
    let method = match stat {
        Statistic::Mi => Method::MiPerm,
        Statistic::X2 => Method::X2Perm,
    };
    let df = tab.df();
    if df == 0 {
        return Ok(TestOutcome {
            permutations_used: Some(plan.replicates),
            ..TestOutcome::degenerate(method)
        });
    }
    let statistic = stat.evaluate(tab);
    let kernel = FixedMarginStatistic::new(tab, stat);
    let size = tab.rows() * tab.cols();
    let mut samplers: Vec<StratumSampler> = tab
        .iter_strata()
        .map(|s| StratumSampler::new(&s, s.k * size))
        .filter(|s| !s.is_fixed())
        .collect();

    let observed = kernel.eval(tab.counts());
    let threshold = observed - TIE_TOLERANCE * observed.abs().max(1.0);
    let mut work = tab.counts().to_vec();
    let mut hits: u64 = 0;
    for r in 0..plan.replicates {
        let mut stream = rng::substream(plan.seed, r as u64);
        for s in samplers.iter_mut() {
            let off = s.offset;
            s.draw(&mut stream, &mut work[off..off + size]);
        }
        if kernel.eval(&work) >= threshold {
            hits += 1;
        }
    }
    Ok(TestOutcome {
        statistic,
        df,
        p_value: hits as f64 / plan.replicates as f64,
        method,
        permutations_used: Some(plan.replicates),
        lambda: None,
    })
}

fn target_probabilities(tab: &StratifiedTable, spec: &ShrinkageSpec) -> Vec<f64> {
    let cells = tab.counts().len();
    match &spec.target {
        ShrinkageTarget::Uniform => vec![1.0 / cells as f64; cells],
        ShrinkageTarget::Explicit(t) => t.clone(),
    }
}

/// Closed-form shrinkage intensity
/// `λ* = (1 − Σ p̂²) / ((n − 1)·Σ (t − p̂)²)`, clamped to `[0, 1]`.
///
/// Returns 1 when `n ≤ 1` or when `p̂` coincides with the target. With the
/// uniform target the ratio is formed in exact integer arithmetic.
pub fn shrinkage_lambda(tab: &StratifiedTable, spec: &ShrinkageSpec) -> Result<f64> {
    let cells = tab.counts().len();
    spec.validate(cells)?;
    let n = tab.n();
    if n <= 1 {
        return Ok(1.0);
    }
    let raw = match &spec.target {
        ShrinkageTarget::Uniform => {
            // p̂ = c/n, t = 1/m:
            // λ* = (n² − Σc²)·m² / ((n − 1)·Σ (m·c − n)²)
            let m = cells as u128;
            let n = n as u128;
            let sum_sq: u128 = tab.counts().iter().map(|&c| (c as u128) * (c as u128)).sum();
            let dev: u128 = tab
                .counts()
                .iter()
                .map(|&c| {
                    let mc = m * c as u128;
                    let d = mc.abs_diff(n);
                    d * d
                })
                .sum();
            if dev == 0 {
                return Ok(1.0);
            }
            let num = (n * n - sum_sq) * m * m;
            let den = (n - 1) * dev;
            num as f64 / den as f64
        }
        ShrinkageTarget::Explicit(t) => {
            let nf = n as f64;
            let mut sum_sq = 0.0;
            let mut dev = 0.0;
            for (&c, &tk) in tab.counts().iter().zip(t) {
                let p = c as f64 / nf;
                sum_sq += p * p;
                dev += (tk - p) * (tk - p);
            }
            if dev == 0.0 {
                return Ok(1.0);
            }
            (1.0 - sum_sq) / ((nf - 1.0) * dev)
        }
    };
    Ok(raw.clamp(0.0, 1.0))
}

/// Shrinkage mutual information test, referred to the same χ² distribution
/// as the maximum likelihood version.
pub fn shrinkage_mi_test(tab: &StratifiedTable, spec: &ShrinkageSpec) -> Result<TestOutcome> {
    spec.validate(tab.counts().len())?;
    let lambda = match spec.lambda_override {
        Some(l) => l,
        None => shrinkage_lambda(tab, spec)?,
    };
    let df = tab.df();
    if df == 0 {
        return Ok(TestOutcome {
            lambda: Some(lambda),
            ..TestOutcome::degenerate(Method::MiShrink)
        });
    }
    let n = tab.n() as f64;
    let target = target_probabilities(tab, spec);
    // n·p̃, which is exactly n_ijk when λ = 0
    let w: Vec<f64> = tab
        .counts()
        .iter()
        .zip(&target)
        .map(|(&c, &t)| lambda * t * n + (1.0 - lambda) * c as f64)
        .collect();
    let statistic = 2.0 * n * weighted_mi(tab.rows(), tab.cols(), tab.strata(), &w);
    Ok(TestOutcome {
        statistic,
        df,
        p_value: chisq_survival(statistic, df)?,
        method: Method::MiShrink,
        permutations_used: None,
        lambda: Some(lambda),
    })
}

/// Runs the configured engine on a prepared table.
pub fn test_table(tab: &StratifiedTable, config: &TestConfig) -> Result<TestOutcome> {
    match config.method {
        Method::Mi => asymptotic_test(tab, Statistic::Mi),
        Method::X2 => asymptotic_test(tab, Statistic::X2),
        Method::MiPerm | Method::X2Perm => permutation_test(
            tab,
            config.method.statistic(),
            PermutationPlan::new(config.permutations, config.seed)?,
        ),
        Method::MiShrink => shrinkage_mi_test(tab, &config.shrinkage),
    }
}

/// Tests `x ⊥ y | z` on `data` with the configured engine.
pub fn ci_test(
    data: &DiscreteDataset,
    x: usize,
    y: usize,
    z: &[usize],
    config: &TestConfig,
) -> Result<TestOutcome> {
    let tab = stratify(data, x, y, z)?;
    test_table(&tab, config)
}

/// Result of an independence query as consumed by the structure learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assessment {
    pub p_value: f64,
    pub statistic: f64,
}

/// Anything that can answer `x ⊥ y | z` with a p-value.
pub trait IndependenceTest {
    fn assess(&self, x: usize, y: usize, z: &[usize]) -> Result<Assessment>;
}

/// Data-backed test. Queries are canonicalized (`x < y`, sorted `z`) and each
/// permutation test draws from a seed derived from the canonical query, so the
/// answer does not depend on argument order or on evaluation order.
#[derive(Debug, Clone)]
pub struct DataTest<'a> {
    data: &'a DiscreteDataset,
    config: TestConfig,
}

impl<'a> DataTest<'a> {
    pub fn new(data: &'a DiscreteDataset, config: TestConfig) -> Self {
        Self { data, config }
    }

    pub fn config(&self) -> &TestConfig {
        &self.config
    }

    pub fn outcome(&self, x: usize, y: usize, z: &[usize]) -> Result<TestOutcome> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let mut zs: Vec<usize> = z.to_vec();
        zs.sort_unstable();
        let mut config = self.config.clone();
        if config.method.is_permutation() {
            let mut key: Vec<u64> = Vec::with_capacity(zs.len() + 3);
            key.push(a as u64);
            key.push(b as u64);
            key.push(zs.len() as u64);
            key.extend(zs.iter().map(|&v| v as u64));
            config.seed = rng::derive_seed(self.config.seed, &key);
        }
        ci_test(self.data, a, b, &zs, &config)
    }
}

impl IndependenceTest for DataTest<'_> {
    fn assess(&self, x: usize, y: usize, z: &[usize]) -> Result<Assessment> {
        let o = self.outcome(x, y, z)?;
        Ok(Assessment { p_value: o.p_value, statistic: o.statistic })
    }
}

/// Describes a test outcome in one line, for logs.
pub fn describe(o: &TestOutcome) -> String {
    format!(
        "{} statistic={} df={} p={}",
        o.method, o.statistic, o.df, o.p_value
    )
}
