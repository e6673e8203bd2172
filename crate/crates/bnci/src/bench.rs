//! Paired benchmark of an alternative test against its parametric baseline.
//!
//! For every sample size and replicate a training sample is drawn from the
//! true network. Both tests learn a structure from that same sample with MMHC,
//! once per score. Each learned network is then scored on the training sample
//! and on a holdout sample drawn once per run, and compared with the true
//! structure by SHD. Scores are only reported for networks learned with the
//! same score.
//!
//! # Protocol files
//!
//! One `key = value` per line; `#` starts a comment.
//!
//! | key | value | default |
//! |---|---|---|
//! | `preset` | `permutation` or `shrinkage`; sets sizes and test pairs | none |
//! | `true_net` | BIF path, relative to the protocol file | required |
//! | `sample_sizes` | comma list, ascending | from preset |
//! | `replicates` | count | 50 |
//! | `holdout_n` | count | 20000 |
//! | `test_pairs` | comma list of `alt:baseline` method tags | from preset |
//! | `alphas` | comma list in (0, 1) | 0.05 |
//! | `scores` | comma list of `bde`, `bic` | `bde, bic` |
//! | `ess` | BDeu equivalent sample size | 10 |
//! | `permutations` | permutation test replicates | 5000 |
//! | `max_cond` | largest MMPC conditioning set | 3 |
//! | `max_parents` | count or `none` | none |
//! | `master_seed` | unsigned integer | 0 |
//! | `alarm_signature` | `true` to require 37 nodes, 46 arcs, 509 parameters | false |

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use bnci_core::citest::DEFAULT_PERMUTATIONS;
use bnci_core::graph::shd;
use bnci_core::learn::{hill_climb, mmpc, LearnConfig, SkeletonCandidates};
use bnci_core::network::forward_sample;
use bnci_core::rng::derive_seed;
use bnci_core::{network_score, BayesNet, Dag, DiscreteDataset, Method, ScoreKind, ScoreSpec, TestConfig};
use rayon::prelude::*;

use crate::error::{Error, Result};

const ROLE_TRAIN: u64 = 1;
const ROLE_HOLDOUT: u64 = 2;
const ROLE_PERMUTATION: u64 = 3;

pub const ALARM_SIGNATURE: (usize, usize, usize) = (37, 46, 509);

pub const RECORD_COLUMNS: [&str; 10] =
    ["test", "baseline", "score", "alpha", "n", "replicate", "indicator", "value_alt", "value_base", "rel_delta"];

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "test", "baseline", "score", "alpha", "n", "ratio", "indicator", "count", "min", "q1", "median", "q3", "max",
    "mean",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestPair {
    pub alt: Method,
    pub base: Method,
}

impl FromStr for TestPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("test pair {s:?} is not 'alt:baseline'")))?;
        Ok(Self { alt: a.trim().parse()?, base: b.trim().parse()? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Permutation,
    Shrinkage,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permutation" => Ok(Preset::Permutation),
            "shrinkage" => Ok(Preset::Shrinkage),
            _ => Err(Error::Format(format!("unknown preset {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub true_net: PathBuf,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub holdout_n: usize,
    pub test_pairs: Vec<TestPair>,
    pub alphas: Vec<f64>,
    pub scores: Vec<ScoreKind>,
    pub ess: f64,
    pub permutations: u32,
    pub max_cond: usize,
    pub max_parents: Option<usize>,
    pub master_seed: u64,
    pub alarm_signature: bool,
}

impl Protocol {
    pub fn new(true_net: impl Into<PathBuf>) -> Self {
        Self {
            true_net: true_net.into(),
            sample_sizes: Vec::new(),
            replicates: 50,
            holdout_n: 20_000,
            test_pairs: Vec::new(),
            alphas: vec![0.05],
            scores: vec![ScoreKind::Bde, ScoreKind::Bic],
            ess: 10.0,
            permutations: DEFAULT_PERMUTATIONS,
            max_cond: bnci_core::learn::DEFAULT_MAX_COND,
            max_parents: None,
            master_seed: 0,
            alarm_signature: false,
        }
    }

    pub fn preset(preset: Preset, true_net: impl Into<PathBuf>) -> Self {
        let mut p = Self::new(true_net);
        p.alarm_signature = true;
        match preset {
            Preset::Permutation => {
                p.sample_sizes = vec![200, 500, 1000, 5000];
                p.test_pairs = vec![
                    TestPair { alt: Method::MiPerm, base: Method::Mi },
                    TestPair { alt: Method::X2Perm, base: Method::X2 },
                ];
            }
            Preset::Shrinkage => {
                p.sample_sizes = vec![10, 20, 50, 100, 150, 200];
                p.test_pairs = vec![TestPair { alt: Method::MiShrink, base: Method::Mi }];
            }
        }
        p
    }

    /// Parses a protocol file; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::parse(i + 1, "expected 'key = value'"))?;
            let key = k.trim().to_string();
            if entries.iter().any(|(_, e, _)| *e == key) {
                return Err(Error::parse(i + 1, format!("duplicate key {key}")));
            }
            entries.push((i + 1, key, v.trim().to_string()));
        }
        let get = |key: &str| entries.iter().find(|(_, k, _)| k == key);
        let (_, _, net) = get("true_net").ok_or_else(|| Error::Format("protocol lacks true_net".into()))?;
        let net_path = base_dir.join(net);
        let mut p = match get("preset") {
            Some((line, _, v)) => Self::preset(v.parse().map_err(|e: Error| Error::parse(*line, e.to_string()))?, net_path),
            None => Self::new(net_path),
        };
        for (line, key, value) in &entries {
            let line = *line;
            let bad = |e: String| Error::parse(line, format!("{key}: {e}"));
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key.as_str() {
                "preset" | "true_net" => {}
                "sample_sizes" => {
                    p.sample_sizes = list().map(|s| s.parse().map_err(|e| bad(format!("{e}")))).collect::<Result<_>>()?
                }
                "replicates" => p.replicates = value.parse().map_err(|e| bad(format!("{e}")))?,
                "holdout_n" => p.holdout_n = value.parse().map_err(|e| bad(format!("{e}")))?,
                "test_pairs" => p.test_pairs = list().map(|s| s.parse().map_err(|e: Error| bad(e.to_string()))).collect::<Result<_>>()?,
                "alphas" => p.alphas = list().map(|s| s.parse().map_err(|e| bad(format!("{e}")))).collect::<Result<_>>()?,
                "scores" => {
                    p.scores = list()
                        .map(|s| s.parse::<ScoreKind>().map_err(|e| bad(e.to_string())))
                        .collect::<Result<_>>()?
                }
                "ess" => p.ess = value.parse().map_err(|e| bad(format!("{e}")))?,
                "permutations" => p.permutations = value.parse().map_err(|e| bad(format!("{e}")))?,
                "max_cond" => p.max_cond = value.parse().map_err(|e| bad(format!("{e}")))?,
                "max_parents" => {
                    p.max_parents = match value.as_str() {
                        "none" => None,
                        v => Some(v.parse().map_err(|e| bad(format!("{e}")))?),
                    }
                }
                "master_seed" => p.master_seed = value.parse().map_err(|e| bad(format!("{e}")))?,
                "alarm_signature" => p.alarm_signature = value.parse().map_err(|e| bad(format!("{e}")))?,
                other => return Err(Error::parse(line, format!("unknown key {other}"))),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Format(format!("protocol: {m}")));
        if self.replicates == 0 {
            return fail("replicates must be at least 1");
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.iter().any(|&n| n == 0) {
            return fail("sample sizes must be positive");
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("sample sizes must be ascending");
        }
        if self.holdout_n == 0 {
            return fail("holdout_n must be positive");
        }
        if self.test_pairs.is_empty() || self.alphas.is_empty() || self.scores.is_empty() {
            return fail("test_pairs, alphas and scores must be non-empty");
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return fail("alphas must lie in (0, 1)");
        }
        if self.permutations == 0 {
            return fail("permutations must be at least 1");
        }
        ScoreSpec::bde(self.ess)?;
        Ok(())
    }

    fn learn_config(&self, method: Method, alpha: f64, kind: ScoreKind, seed: u64) -> LearnConfig {
        let score = match kind {
            ScoreKind::Bde => ScoreSpec { kind, ess: self.ess },
            ScoreKind::Bic => ScoreSpec::bic(),
        };
        let mut cfg = LearnConfig::new(TestConfig::new(method).with_permutations(self.permutations), score)
            .with_alpha(alpha)
            .with_seed(seed);
        cfg.max_cond = self.max_cond;
        cfg.max_parents = self.max_parents;
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Indicator {
    BdeHoldout,
    BdeTrain,
    BicHoldout,
    BicTrain,
    Shd,
}

impl Indicator {
    pub fn tag(self) -> &'static str {
        match self {
            Indicator::BdeTrain => "bde_train",
            Indicator::BicTrain => "bic_train",
            Indicator::BdeHoldout => "bde_holdout",
            Indicator::BicHoldout => "bic_holdout",
            Indicator::Shd => "shd",
        }
    }

    fn train(kind: ScoreKind) -> Self {
        match kind {
            ScoreKind::Bde => Indicator::BdeTrain,
            ScoreKind::Bic => Indicator::BicTrain,
        }
    }

    fn holdout(kind: ScoreKind) -> Self {
        match kind {
            ScoreKind::Bde => Indicator::BdeHoldout,
            ScoreKind::Bic => Indicator::BicHoldout,
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub test: Method,
    pub baseline: Method,
    pub score: ScoreKind,
    pub alpha: f64,
    pub n: usize,
    pub replicate: usize,
    pub indicator: Indicator,
    pub value_alt: f64,
    pub value_base: f64,
    pub rel_delta: f64,
    /// Set when a score baseline was zero and `rel_delta` is a raw difference.
    pub raw_delta: bool,
}

impl BenchRecord {
    fn sort_key(&self) -> (&'static str, &'static str, &'static str, u64, usize, usize, &'static str) {
        (
            self.test.tag(),
            self.baseline.tag(),
            self.score.tag(),
            self.alpha.to_bits(),
            self.n,
            self.replicate,
            self.indicator.tag(),
        )
    }
}

/// Standardized difference. Scores: `(alt − base)/|base|`, positive when the
/// alternative scores higher. SHD: `(base − alt)/max(base, 1)`, negative when
/// the baseline is closer to the truth. The flag marks a zero score baseline,
/// for which the raw difference is returned.
pub fn rel_delta(indicator: Indicator, alt: f64, base: f64) -> (f64, bool) {
    match indicator {
        Indicator::Shd => ((base - alt) / base.max(1.0), false),
        _ if base == 0.0 => (alt - base, true),
        _ => ((alt - base) / base.abs(), false),
    }
}

/// Checks the 37/46/509 signature.
pub fn check_alarm(net: &BayesNet) -> Result<()> {
    let got = (net.n_nodes(), net.dag().n_arcs(), net.free_parameters());
    if got != ALARM_SIGNATURE {
        return Err(Error::Format(format!(
            "expected {:?} nodes/arcs/parameters, network has {got:?}",
            ALARM_SIGNATURE
        )));
    }
    Ok(())
}

/// Runs every replicate. Failed replicates are logged and left out.
pub fn run_protocol(p: &Protocol, net: &BayesNet) -> Result<Vec<BenchRecord>> {
    p.validate()?;
    if p.alarm_signature {
        check_alarm(net)?;
    }
    let holdout = forward_sample(net, p.holdout_n, derive_seed(p.master_seed, &[ROLE_HOLDOUT]))?;
    let jobs: Vec<(usize, usize)> =
        p.sample_sizes.iter().flat_map(|&n| (0..p.replicates).map(move |r| (n, r))).collect();
    let results: Vec<(usize, usize, Result<Vec<BenchRecord>>)> = jobs
        .par_iter()
        .map(|&(n, r)| (n, r, run_replicate(p, net, &holdout, n, r)))
        .collect();
    let mut records = Vec::new();
    for (n, r, res) in results {
        match res {
            Ok(mut v) => records.append(&mut v),
            Err(e) => log::error!("replicate {r} at n = {n} failed: {e}"),
        }
    }
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(records)
}

/// One training sample, every test pair, alpha and score.
pub fn run_replicate(
    p: &Protocol,
    net: &BayesNet,
    holdout: &DiscreteDataset,
    n: usize,
    replicate: usize,
) -> Result<Vec<BenchRecord>> {
    let start = Instant::now();
    let key = [n as u64, replicate as u64];
    let train = forward_sample(net, n, derive_seed(p.master_seed, &[ROLE_TRAIN, key[0], key[1]]))?;
    let test_seed = derive_seed(p.master_seed, &[ROLE_PERMUTATION, key[0], key[1]]);
    let mut skeletons: BTreeMap<(Method, u64), SkeletonCandidates> = BTreeMap::new();
    let mut out = Vec::new();
    for pair in &p.test_pairs {
        for &alpha in &p.alphas {
            for method in [pair.alt, pair.base] {
                if !skeletons.contains_key(&(method, alpha.to_bits())) {
                    let cfg = p.learn_config(method, alpha, ScoreKind::Bde, test_seed);
                    skeletons.insert((method, alpha.to_bits()), mmpc(&train, &cfg)?);
                }
            }
            for &kind in &p.scores {
                let learn = |method: Method| -> Result<Dag> {
                    let cfg = p.learn_config(method, alpha, kind, test_seed);
                    let skel = &skeletons[&(method, alpha.to_bits())];
                    let dag = hill_climb(&train, skel, &cfg)?;
                    if dag.arcs().iter().any(|&(a, b)| !skel.contains(a, b)) {
                        return Err(Error::Format("learned arc outside the candidate skeleton".into()));
                    }
                    Ok(dag)
                };
                let alt = learn(pair.alt)?;
                let base = learn(pair.base)?;
                let spec = match kind {
                    ScoreKind::Bde => ScoreSpec { kind, ess: p.ess },
                    ScoreKind::Bic => ScoreSpec::bic(),
                };
                let values = [
                    (
                        Indicator::train(kind),
                        network_score(&alt, &train, spec)?.total,
                        network_score(&base, &train, spec)?.total,
                    ),
                    (
                        Indicator::holdout(kind),
                        network_score(&alt, holdout, spec)?.total,
                        network_score(&base, holdout, spec)?.total,
                    ),
                    (Indicator::Shd, shd(&alt, net.dag())? as f64, shd(&base, net.dag())? as f64),
                ];
                for (indicator, a, b) in values {
                    let (d, raw) = rel_delta(indicator, a, b);
                    if raw {
                        log::warn!("zero baseline for {indicator} at n = {n}, replicate {replicate}; raw difference kept");
                    }
                    out.push(BenchRecord {
                        test: pair.alt,
                        baseline: pair.base,
                        score: kind,
                        alpha,
                        n,
                        replicate,
                        indicator,
                        value_alt: a,
                        value_base: b,
                        rel_delta: d,
                        raw_delta: raw,
                    });
                }
            }
        }
    }
    log::info!("n = {n} replicate {replicate} done in {:.2?}", start.elapsed());
    Ok(out)
}

/// Sample quantile with linear interpolation between order statistics
/// (`h = (m − 1)p`). `sorted` must be non-empty and ascending.
pub fn quantile(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub test: Method,
    pub baseline: Method,
    pub score: ScoreKind,
    pub alpha: f64,
    pub n: usize,
    pub indicator: Indicator,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Box-plot statistics of `rel_delta` per (test, baseline, score, alpha, n,
/// indicator). Groups without records do not appear.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<_, (&BenchRecord, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let k = r.sort_key();
        let key = (k.0, k.1, k.2, k.3, k.4, k.6);
        groups.entry(key).or_insert_with(|| (r, Vec::new())).1.push(r.rel_delta);
    }
    groups
        .into_values()
        .map(|(r, mut v)| {
            v.sort_by(f64::total_cmp);
            SummaryRow {
                test: r.test,
                baseline: r.baseline,
                score: r.score,
                alpha: r.alpha,
                n: r.n,
                indicator: r.indicator,
                count: v.len(),
                min: v[0],
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
                max: v[v.len() - 1],
                mean: v.iter().sum::<f64>() / v.len() as f64,
            }
        })
        .collect()
}

/// Median of `value_alt` or `value_base` for one indicator group.
pub fn median_value(records: &[BenchRecord], test: Method, score: ScoreKind, n: usize, indicator: Indicator, alt: bool) -> Option<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.test == test && r.score == score && r.n == n && r.indicator == indicator)
        .map(|r| if alt { r.value_alt } else { r.value_base })
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(quantile(&v, 0.5))
}

pub fn write_records<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.test.tag().to_string(),
            r.baseline.tag().to_string(),
            r.score.tag().to_string(),
            r.alpha.to_string(),
            r.n.to_string(),
            r.replicate.to_string(),
            r.indicator.tag().to_string(),
            r.value_alt.to_string(),
            r.value_base.to_string(),
            r.rel_delta.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))?;
    Ok(())
}

/// Writes the summary; `ratio` is `n / parameters` of the true network.
pub fn write_summary<W: Write>(rows: &[SummaryRow], parameters: usize, w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.test.tag().to_string(),
            r.baseline.tag().to_string(),
            r.score.tag().to_string(),
            r.alpha.to_string(),
            r.n.to_string(),
            format!("{:.4}", r.n as f64 / parameters as f64),
            r.indicator.tag().to_string(),
            r.count.to_string(),
            r.min.to_string(),
            r.q1.to_string(),
            r.median.to_string(),
            r.q3.to_string(),
            r.max.to_string(),
            r.mean.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_delta_examples() {
        assert!((rel_delta(Indicator::BdeTrain, -90.0, -100.0).0 - 0.1).abs() < 1e-15);
        assert_eq!(rel_delta(Indicator::BicHoldout, -5.0, -5.0).0, 0.0);
        assert_eq!(rel_delta(Indicator::Shd, 12.0, 10.0).0, -0.2);
        assert_eq!(rel_delta(Indicator::Shd, 3.0, 0.0).0, -3.0);
        assert_eq!(rel_delta(Indicator::BdeTrain, -2.0, 0.0), (-2.0, true));
    }

    #[test]
    fn r7_quantiles() {
        let v = [-0.2, 0.0, 0.2];
        assert_eq!(quantile(&v, 0.5), 0.0);
        assert!((quantile(&v, 0.25) + 0.1).abs() < 1e-15);
        assert!((quantile(&v, 0.75) - 0.1).abs() < 1e-15);
        assert_eq!(quantile(&[4.0], 0.25), 4.0);
        // 1..=10, p = 0.25 → 1 + 2.25
        let w: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!((quantile(&w, 0.25) - 3.25).abs() < 1e-15);
    }

    fn record(n: usize, rep: usize, d: f64) -> BenchRecord {
        BenchRecord {
            test: Method::MiPerm,
            baseline: Method::Mi,
            score: ScoreKind::Bde,
            alpha: 0.05,
            n,
            replicate: rep,
            indicator: Indicator::Shd,
            value_alt: 0.0,
            value_base: 0.0,
            rel_delta: d,
            raw_delta: false,
        }
    }

    #[test]
    fn summary_groups() {
        let rows = summarize(&[record(10, 0, 0.2), record(10, 1, -0.2), record(10, 2, 0.0), record(20, 0, 1.5)]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].median, 0.0);
        assert_eq!(rows[0].count, 3);
        assert_eq!((rows[1].q1, rows[1].median, rows[1].q3), (1.5, 1.5, 1.5));
        assert!(summarize(&[]).is_empty());
    }

    #[test]
    fn protocol_parsing() {
        let text = "# grid\npreset = permutation\ntrue_net = nets/alarm.bif\nsample_sizes = 200, 5000\n\
                    replicates = 10\npermutations = 500\nmaster_seed = 7\n";
        let p = Protocol::parse(text, Path::new("/data")).unwrap();
        assert_eq!(p.true_net, Path::new("/data/nets/alarm.bif"));
        assert_eq!(p.sample_sizes, [200, 5000]);
        assert_eq!(p.replicates, 10);
        assert_eq!(p.holdout_n, 20000);
        assert_eq!(p.test_pairs.len(), 2);
        assert!(p.alarm_signature);
        assert_eq!(p.alphas, [0.05]);

        let shrink = Protocol::parse("preset = shrinkage\ntrue_net = a.bif\n", Path::new(".")).unwrap();
        assert_eq!(shrink.sample_sizes, [10, 20, 50, 100, 150, 200]);
        assert_eq!(shrink.test_pairs, [TestPair { alt: Method::MiShrink, base: Method::Mi }]);

        for bad in [
            "true_net = a\nsample_sizes = 5, 3\ntest_pairs = mi_perm:mi\n",
            "true_net = a\nsample_sizes = 5\ntest_pairs = mi_perm:mi\nreplicates = 0\n",
            "true_net = a\nsample_sizes = 5\ntest_pairs = foo:mi\n",
            "true_net = a\nsample_sizes = 5\ntest_pairs = mi_perm:mi\nbogus = 1\n",
            "sample_sizes = 5\ntest_pairs = mi_perm:mi\n",
        ] {
            assert!(Protocol::parse(bad, Path::new(".")).is_err(), "{bad}");
        }
    }

    #[test]
    fn ratio_column() {
        let mut buf = Vec::new();
        let rows = summarize(&[record(200, 0, 0.0)]);
        write_summary(&rows, 509, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",0.3929,"), "{text}");
    }
}
