//! Decomposable network scores: BDeu and BIC, both on the log scale and
//! higher-is-better.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::data::DiscreteDataset;
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::math::{lgamma, log};

pub const DEFAULT_ESS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreKind {
    Bde,
    Bic,
}

impl ScoreKind {
    pub fn tag(self) -> &'static str {
        match self {
            ScoreKind::Bde => "bde",
            ScoreKind::Bic => "bic",
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bde" | "bdeu" => Ok(ScoreKind::Bde),
            "bic" => Ok(ScoreKind::Bic),
            other => Err(Error::Config(format!("unknown score {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSpec {
    pub kind: ScoreKind,
    /// Equivalent sample size; only used by BDeu.
    pub ess: f64,
}

impl ScoreSpec {
    pub fn bde(ess: f64) -> Result<Self> {
        if !(ess > 0.0) || !ess.is_finite() {
            return Err(Error::Config(format!("equivalent sample size must be positive, got {ess}")));
        }
        Ok(Self { kind: ScoreKind::Bde, ess })
    }

    pub fn bic() -> Self {
        Self { kind: ScoreKind::Bic, ess: DEFAULT_ESS }
    }

    pub fn of_kind(kind: ScoreKind) -> Self {
        match kind {
            ScoreKind::Bde => Self::default(),
            ScoreKind::Bic => Self::bic(),
        }
    }
}

impl Default for ScoreSpec {
    fn default() -> Self {
        Self { kind: ScoreKind::Bde, ess: DEFAULT_ESS }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreValue {
    pub total: f64,
    pub per_node: Vec<(String, f64)>,
    pub n: usize,
    /// Free parameters `Σ q_i (r_i − 1)`; reported for BIC only.
    pub params: Option<usize>,
}

/// BDeu local log marginal likelihood of `node` given `parents`.
pub fn local_bde(data: &DiscreteDataset, node: usize, parents: &[usize], ess: f64) -> Result<f64> {
    if !(ess > 0.0) {
        return Err(Error::Config(format!("equivalent sample size must be positive, got {ess}")));
    }
    let counts = data.family_counts(node, parents)?;
    let q = counts.parent_configs as f64;
    let r = counts.levels as f64;
    let a_j = ess / q;
    let a_jk = ess / (q * r);
    let lg_a_jk = lgamma(a_jk);
    let mut score = 0.0;
    for (_, row) in &counts.configs {
        let n_j: u64 = row.iter().sum();
        score += lgamma(a_j) - lgamma(a_j + n_j as f64);
        for &c in row {
            if c > 0 {
                score += lgamma(a_jk + c as f64) - lg_a_jk;
            }
        }
    }
    Ok(score)
}

/// BIC local score: maximized log-likelihood minus `q(r − 1)/2 · log n`.
pub fn local_bic(data: &DiscreteDataset, node: usize, parents: &[usize]) -> Result<f64> {
    let counts = data.family_counts(node, parents)?;
    let mut ll = 0.0;
    for (_, row) in &counts.configs {
        let n_j: u64 = row.iter().sum();
        for &c in row {
            if c > 0 {
                ll += c as f64 * log(c as f64 / n_j as f64);
            }
        }
    }
    let d = counts.parent_configs as f64 * (counts.levels as f64 - 1.0);
    Ok(ll - 0.5 * d * log(data.n() as f64))
}

/// Source of local scores for the hill climber.
pub trait LocalScore {
    fn local(&mut self, node: usize, parents: &[usize]) -> Result<f64>;
}

/// Memoized local scores for one dataset and one score specification,
/// keyed by `(node, sorted parent set)`.
#[derive(Debug, Clone)]
pub struct ScoreCache<'a> {
    data: &'a DiscreteDataset,
    spec: ScoreSpec,
    cache: BTreeMap<(usize, Vec<usize>), f64>,
    misses: usize,
}

impl<'a> ScoreCache<'a> {
    pub fn new(data: &'a DiscreteDataset, spec: ScoreSpec) -> Result<Self> {
        if spec.kind == ScoreKind::Bde {
            ScoreSpec::bde(spec.ess)?;
        }
        Ok(Self { data, spec, cache: BTreeMap::new(), misses: 0 })
    }

    pub fn spec(&self) -> ScoreSpec {
        self.spec
    }

    pub fn data(&self) -> &'a DiscreteDataset {
        self.data
    }

    /// Number of local scores computed so far (cache misses).
    pub fn computed(&self) -> usize {
        self.misses
    }

    fn compute(&self, node: usize, parents: &[usize]) -> Result<f64> {
        match self.spec.kind {
            ScoreKind::Bde => local_bde(self.data, node, parents, self.spec.ess),
            ScoreKind::Bic => local_bic(self.data, node, parents),
        }
    }
}

impl LocalScore for ScoreCache<'_> {
    fn local(&mut self, node: usize, parents: &[usize]) -> Result<f64> {
        let mut key = parents.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.cache.get(&(node, key.clone())) {
            return Ok(v);
        }
        let v = self.compute(node, &key)?;
        self.misses += 1;
        self.cache.insert((node, key), v);
        Ok(v)
    }
}

/// Score of `dag` on `data`, summed over nodes. Nodes are matched to dataset
/// columns by name.
pub fn network_score(dag: &Dag, data: &DiscreteDataset, spec: ScoreSpec) -> Result<ScoreValue> {
    let mut cache = ScoreCache::new(data, spec)?;
    score_with(dag, &mut cache)
}

/// [`network_score`] reusing an existing cache.
pub fn score_with(dag: &Dag, cache: &mut ScoreCache<'_>) -> Result<ScoreValue> {
    let data = cache.data();
    if dag.n_nodes() != data.n_vars() {
        return Err(Error::InvalidArgument(format!(
            "graph has {} nodes, dataset has {} variables",
            dag.n_nodes(),
            data.n_vars()
        )));
    }
    let cols: Vec<usize> = dag
        .names()
        .iter()
        .map(|n| {
            data.index_of(n)
                .ok_or_else(|| Error::InvalidArgument(format!("dataset lacks variable {n}")))
        })
        .collect::<Result<_>>()?;
    let mut per_node = Vec::with_capacity(dag.n_nodes());
    let mut params = 0usize;
    for v in 0..dag.n_nodes() {
        let parents: Vec<usize> = dag.parents(v).iter().map(|&p| cols[p]).collect();
        per_node.push((dag.name(v).into(), cache.local(cols[v], &parents)?));
        let q: usize = parents.iter().map(|&p| data.cardinality(p)).product();
        params += q * (data.cardinality(cols[v]) - 1);
    }
    let total = per_node.iter().map(|(_, s)| s).sum();
    Ok(ScoreValue {
        total,
        per_node,
        n: data.n(),
        params: (cache.spec().kind == ScoreKind::Bic).then_some(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Variable;
    use crate::network::{fit_mle, forward_sample, log_likelihood, tests::random_net};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn binary(names: &[&str]) -> Vec<Variable> {
        names
            .iter()
            .map(|n| Variable::new(*n, vec!["0".to_string(), "1".to_string()]).unwrap())
            .collect()
    }

    fn one_column(rows: &[u32]) -> DiscreteDataset {
        let rows: Vec<Vec<u32>> = rows.iter().map(|&x| vec![x]).collect();
        DiscreteDataset::from_rows(binary(&["A"]), &rows).unwrap()
    }

    #[test]
    fn bde_example() {
        let d = one_column(&[0, 0, 0, 1]);
        let s = local_bde(&d, 0, &[], 10.0).unwrap();
        // lnΓ(10) − lnΓ(14) + lnΓ(8) − lnΓ(5) + lnΓ(6) − lnΓ(5)
        let direct = log(362880.0 / 6227020800.0) + log(5040.0 / 24.0) + log(120.0 / 24.0);
        assert!((s - direct).abs() < 1e-10);
        assert!((s + 2.793792).abs() < 1e-5);
        assert_eq!(ScoreSpec::default().ess, 10.0);
        assert!(ScoreSpec::bde(0.0).is_err());
    }

    #[test]
    fn bic_examples() {
        let d = one_column(&[0, 0, 0, 1]);
        let s = local_bic(&d, 0, &[]).unwrap();
        assert!((s - (3.0 * log(0.75) + log(0.25) - 0.5 * log(4.0))).abs() < 1e-12);
        assert!((s + 2.942488).abs() < 1e-6);
        let d = one_column(&[0, 0, 0, 0]);
        assert!((local_bic(&d, 0, &[]).unwrap() + 0.693147).abs() < 1e-6);
    }

    #[test]
    fn bic_equals_fitted_log_likelihood_minus_penalty() {
        let net = BayesNetFixture::chain();
        let data = forward_sample(&net, 300, 5).unwrap();
        let v = network_score(net.dag(), &data, ScoreSpec::bic()).unwrap();
        let fitted = fit_mle(net.dag(), &data).unwrap();
        let ll = log_likelihood(&fitted, &data).unwrap();
        let d = v.params.unwrap() as f64;
        assert!((v.total - (ll - 0.5 * d * log(300.0))).abs() < 1e-8);
    }

    struct BayesNetFixture;
    impl BayesNetFixture {
        fn chain() -> crate::network::BayesNet {
            crate::network::BayesNet::new(
                "chain",
                binary(&["A", "B", "C"]),
                vec![
                    (vec![], vec![0.3, 0.7]),
                    (vec![0], vec![0.9, 0.1, 0.2, 0.8]),
                    (vec![1], vec![0.85, 0.15, 0.1, 0.9]),
                ],
            )
            .unwrap()
        }
    }

    #[test]
    fn empty_graph_decomposes() {
        let net = BayesNetFixture::chain();
        let data = forward_sample(&net, 100, 1).unwrap();
        let empty = Dag::new(net.dag().names().to_vec()).unwrap();
        for spec in [ScoreSpec::default(), ScoreSpec::bic()] {
            let v = network_score(&empty, &data, spec).unwrap();
            let mut sum = 0.0;
            for x in 0..3 {
                sum += match spec.kind {
                    ScoreKind::Bde => local_bde(&data, x, &[], 10.0).unwrap(),
                    ScoreKind::Bic => local_bic(&data, x, &[]).unwrap(),
                };
            }
            assert!((v.total - sum).abs() < 1e-9);
            let per: f64 = v.per_node.iter().map(|(_, s)| s).sum();
            assert!((v.total - per).abs() < 1e-9);
        }
    }

    #[test]
    fn cache_is_consistent_and_local() {
        let net = BayesNetFixture::chain();
        let data = forward_sample(&net, 200, 9).unwrap();
        let mut cache = ScoreCache::new(&data, ScoreSpec::default()).unwrap();
        let a = cache.local(2, &[1, 0]).unwrap();
        let b = cache.local(2, &[0, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.computed(), 1);
        let g1 = Dag::from_arcs(net.dag().names().to_vec(), &[(0, 1)]).unwrap();
        let g2 = Dag::from_arcs(net.dag().names().to_vec(), &[(0, 1), (0, 2)]).unwrap();
        let s1 = score_with(&g1, &mut cache).unwrap();
        let s2 = score_with(&g2, &mut cache).unwrap();
        assert_eq!(s1.per_node[0], s2.per_node[0]);
        assert_eq!(s1.per_node[1], s2.per_node[1]);
        assert_ne!(s1.per_node[2], s2.per_node[2]);
    }

    #[test]
    fn bic_penalizes_irrelevant_parent() {
        // A and B independent in the generator
        let net = crate::network::BayesNet::new(
            "indep",
            binary(&["A", "B"]),
            vec![(vec![], vec![0.4, 0.6]), (vec![], vec![0.7, 0.3])],
        )
        .unwrap();
        let names = net.dag().names().to_vec();
        let empty = Dag::new(names.clone()).unwrap();
        let arc = Dag::from_arcs(names, &[(0, 1)]).unwrap();
        for seed in 0..10 {
            let data = forward_sample(&net, 1000, seed).unwrap();
            let e = network_score(&empty, &data, ScoreSpec::bic()).unwrap().total;
            let a = network_score(&arc, &data, ScoreSpec::bic()).unwrap().total;
            assert!(a < e, "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bdeu_is_score_equivalent_for_single_arc(net in random_net(4), seed in any::<u64>()) {
            let data = forward_sample(&net, 80, seed).unwrap();
            if data.n_vars() >= 2 {
                let names = net.dag().names().to_vec();
                let ab = Dag::from_arcs(names.clone(), &[(0, 1)]).unwrap();
                let ba = Dag::from_arcs(names, &[(1, 0)]).unwrap();
                let s1 = network_score(&ab, &data, ScoreSpec::default()).unwrap().total;
                let s2 = network_score(&ba, &data, ScoreSpec::default()).unwrap().total;
                prop_assert!((s1 - s2).abs() < 1e-9, "{} vs {}", s1, s2);
            }
        }
    }
}
