//! Max-Min Hill-Climbing: MMPC candidate discovery followed by greedy
//! hill climbing restricted to the candidate skeleton.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Ordering;

use crate::citest::{Assessment, DataTest, IndependenceTest, Method, TestConfig};
use crate::data::DiscreteDataset;
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::score::{LocalScore, ScoreCache, ScoreSpec};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MAX_COND: usize = 3;

/// Score gains at or below this are not treated as improvements.
pub const MIN_IMPROVEMENT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    pub test: TestConfig,
    pub alpha: f64,
    pub score: ScoreSpec,
    pub max_parents: Option<usize>,
    /// Largest conditioning set tried in MMPC subset searches.
    pub max_cond: usize,
    /// Seed for randomized tests; overrides `test.seed`.
    pub seed: u64,
}

impl LearnConfig {
    pub fn new(test: TestConfig, score: ScoreSpec) -> Self {
        Self {
            test,
            alpha: DEFAULT_ALPHA,
            score,
            max_parents: None,
            max_cond: DEFAULT_MAX_COND,
            seed: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.test.permutations == 0 {
            return Err(Error::Config("permutation count must be at least 1".into()));
        }
        if self.max_parents == Some(0) {
            return Err(Error::Config("max_parents must be at least 1".into()));
        }
        Ok(())
    }

    /// The test configuration actually used, with the learner seed applied.
    pub fn test_config(&self) -> TestConfig {
        self.test.clone().with_seed(self.seed)
    }
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self::new(TestConfig::new(Method::Mi), ScoreSpec::default())
    }
}

/// Candidate parents and children per node, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonCandidates {
    sets: Vec<Vec<usize>>,
}

impl SkeletonCandidates {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.len();
        for (x, s) in sets.iter_mut().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.iter().any(|&y| y >= n || y == x) {
                return Err(Error::InvalidArgument(format!("bad candidate set for node {x}")));
            }
        }
        Ok(Self { sets })
    }

    pub fn empty(n: usize) -> Self {
        Self { sets: vec![Vec::new(); n] }
    }

    pub fn n_nodes(&self) -> usize {
        self.sets.len()
    }

    pub fn of(&self, x: usize) -> &[usize] {
        &self.sets[x]
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.sets[x].binary_search(&y).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.sets.len()).all(|x| self.sets[x].iter().all(|&y| self.contains(y, x)))
    }

    /// Pairs `(x, y)` with `x < y` and `y ∈ CPC(x)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (x, s) in self.sets.iter().enumerate() {
            out.extend(s.iter().filter(|&&y| y > x).map(|&y| (x, y)));
        }
        out
    }

    /// Keeps `y ∈ CPC(x)` only when `x ∈ CPC(y)`.
    pub fn and_rule(&self) -> Self {
        let sets = (0..self.sets.len())
            .map(|x| self.sets[x].iter().copied().filter(|&y| self.contains(y, x)).collect())
            .collect();
        Self { sets }
    }
}

/// Memoizes an independence test on canonical queries.
pub struct CachedTest<T> {
    inner: T,
    cache: RefCell<BTreeMap<(usize, usize, Vec<usize>), Assessment>>,
}

impl<T: IndependenceTest> CachedTest<T> {
    pub fn new(inner: T) -> Self {
        Self { inner, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn queries(&self) -> usize {
        self.cache.borrow().len()
    }
}

impl<T: IndependenceTest> IndependenceTest for CachedTest<T> {
    fn assess(&self, x: usize, y: usize, z: &[usize]) -> Result<Assessment> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let mut zs = z.to_vec();
        zs.sort_unstable();
        let key = (a, b, zs);
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let v = self.inner.assess(a, b, &key.2)?;
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }
}

/// Answers queries by d-separation in a known graph.
pub struct DsepOracle<'a> {
    dag: &'a Dag,
}

impl<'a> DsepOracle<'a> {
    pub fn new(dag: &'a Dag) -> Self {
        Self { dag }
    }
}

impl IndependenceTest for DsepOracle<'_> {
    fn assess(&self, x: usize, y: usize, z: &[usize]) -> Result<Assessment> {
        Ok(if self.dag.d_separated(x, y, z) {
            Assessment { p_value: 1.0, statistic: 0.0 }
        } else {
            Assessment { p_value: 0.0, statistic: 1.0 }
        })
    }
}

/// Association ordering: smaller p is stronger, then larger statistic.
fn stronger(a: &Assessment, b: &Assessment) -> Ordering {
    b.p_value
        .partial_cmp(&a.p_value)
        .unwrap_or(Ordering::Equal)
        .then(a.statistic.partial_cmp(&b.statistic).unwrap_or(Ordering::Equal))
}

/// Calls `f` on every subset of `items` with at most `max` elements, in
/// order of increasing size, until `f` returns `true`.
fn any_subset(
    items: &[usize],
    max: usize,
    f: &mut dyn FnMut(&[usize]) -> Result<bool>,
) -> Result<bool> {
    fn rec(
        items: &[usize],
        start: usize,
        size: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> Result<bool>,
    ) -> Result<bool> {
        if cur.len() == size {
            return f(cur);
        }
        for i in start..items.len() {
            cur.push(items[i]);
            let hit = rec(items, i + 1, size, cur, f)?;
            cur.pop();
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
    let mut cur = Vec::new();
    for size in 0..=max.min(items.len()) {
        if rec(items, 0, size, &mut cur, f)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// MMPC for one target against any test.
pub fn mmpc_node_with(
    test: &dyn IndependenceTest,
    n_vars: usize,
    x: usize,
    alpha: f64,
    max_cond: usize,
) -> Result<Vec<usize>> {
    if x >= n_vars {
        return Err(Error::InvalidArgument(format!("node {x} out of range")));
    }
    let mut cpc: Vec<usize> = Vec::new();
    // Minimum association of each live candidate over the subsets seen so far.
    let mut live: Vec<(usize, Assessment)> = Vec::new();
    for y in (0..n_vars).filter(|&y| y != x) {
        let a = test.assess(x, y, &[])?;
        if a.p_value < alpha {
            live.push((y, a));
        }
    }
    while !live.is_empty() {
        let mut best = 0;
        for i in 1..live.len() {
            if stronger(&live[i].1, &live[best].1) == Ordering::Greater {
                best = i;
            }
        }
        let (added, _) = live.remove(best);
        let previous = cpc.clone();
        cpc.push(added);
        if max_cond == 0 {
            continue;
        }
        // Only subsets containing the new member are new.
        let mut kept = Vec::with_capacity(live.len());
        for (y, mut min) in live {
            let mut z = Vec::new();
            let independent = any_subset(&previous, max_cond - 1, &mut |s| {
                z.clear();
                z.extend_from_slice(s);
                z.push(added);
                let a = test.assess(x, y, &z)?;
                if stronger(&a, &min) == Ordering::Less {
                    min = a;
                }
                Ok(a.p_value >= alpha)
            })?;
            if !independent {
                kept.push((y, min));
            }
        }
        live = kept;
    }
    cpc.sort_unstable();
    let mut i = 0;
    while i < cpc.len() {
        let y = cpc[i];
        let rest: Vec<usize> = cpc.iter().copied().filter(|&v| v != y).collect();
        let independent =
            any_subset(&rest, max_cond, &mut |s| Ok(test.assess(x, y, s)?.p_value >= alpha))?;
        if independent {
            cpc.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(cpc)
}

/// MMPC over all nodes with the AND symmetry correction.
pub fn mmpc_with(
    test: &dyn IndependenceTest,
    n_vars: usize,
    alpha: f64,
    max_cond: usize,
) -> Result<SkeletonCandidates> {
    let sets = (0..n_vars)
        .map(|x| mmpc_node_with(test, n_vars, x, alpha, max_cond))
        .collect::<Result<Vec<_>>>()?;
    Ok(SkeletonCandidates::new(sets)?.and_rule())
}

pub fn mmpc_node(data: &DiscreteDataset, x: usize, config: &LearnConfig) -> Result<Vec<usize>> {
    config.validate()?;
    let test = DataTest::new(data, config.test_config());
    mmpc_node_with(&test, data.n_vars(), x, config.alpha, config.max_cond)
}

pub fn mmpc(data: &DiscreteDataset, config: &LearnConfig) -> Result<SkeletonCandidates> {
    config.validate()?;
    let test = CachedTest::new(DataTest::new(data, config.test_config()));
    mmpc_with(&test, data.n_vars(), config.alpha, config.max_cond)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Move {
    Add(usize, usize),
    Delete(usize, usize),
    Reverse(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Climb {
    pub dag: Dag,
    pub score: f64,
    /// Score after each applied move, starting with the empty graph.
    pub trace: Vec<f64>,
    pub moves: Vec<Move>,
}

fn with(parents: &[usize], extra: usize) -> Vec<usize> {
    let mut v = parents.to_vec();
    v.push(extra);
    v
}

fn without(parents: &[usize], drop: usize) -> Vec<usize> {
    parents.iter().copied().filter(|&p| p != drop).collect()
}

/// Greedy hill climbing from the empty graph. Arcs may only join candidate
/// pairs; ties in gain go to the smallest move.
pub fn hill_climb_with(
    score: &mut dyn LocalScore,
    names: Vec<alloc::string::String>,
    candidates: &SkeletonCandidates,
    max_parents: Option<usize>,
) -> Result<Climb> {
    let n = names.len();
    if candidates.n_nodes() != n {
        return Err(Error::InvalidArgument(format!(
            "candidate sets cover {} nodes, graph has {n}",
            candidates.n_nodes()
        )));
    }
    if !candidates.is_symmetric() {
        return Err(Error::InvalidArgument("candidate sets are not symmetric".into()));
    }
    let cap = max_parents.unwrap_or(usize::MAX);
    let mut dag = Dag::new(names)?;
    let mut local = Vec::with_capacity(n);
    for v in 0..n {
        local.push(score.local(v, &[])?);
    }
    let mut total: f64 = local.iter().sum();
    let mut trace = vec![total];
    let mut moves = Vec::new();
    let pairs = candidates.pairs();
    loop {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |gain: f64, m: Move| {
            let better = match best {
                None => true,
                Some((g, bm)) => gain > g || (gain == g && m < bm),
            };
            if better {
                best = Some((gain, m));
            }
        };
        for &(a, b) in &pairs {
            for (p, c) in [(a, b), (b, a)] {
                if dag.has_arc(p, c) {
                    let pa_c = dag.parents(c);
                    let del_c = score.local(c, &without(pa_c, p))? - local[c];
                    consider(del_c, Move::Delete(p, c));
                    if dag.parents(p).len() < cap {
                        dag.remove_arc(p, c);
                        let acyclic = !dag.has_path(p, c);
                        dag.add_arc(p, c)?;
                        if acyclic {
                            let add_p = score.local(p, &with(dag.parents(p), c))? - local[p];
                            consider(del_c + add_p, Move::Reverse(p, c));
                        }
                    }
                } else if !dag.has_arc(c, p) && dag.parents(c).len() < cap && !dag.has_path(c, p) {
                    let gain = score.local(c, &with(dag.parents(c), p))? - local[c];
                    consider(gain, Move::Add(p, c));
                }
            }
        }
        let Some((gain, m)) = best else { break };
        if !(gain > MIN_IMPROVEMENT) {
            break;
        }
        match m {
            Move::Add(p, c) => dag.add_arc(p, c)?,
            Move::Delete(p, c) => {
                dag.remove_arc(p, c);
            }
            Move::Reverse(p, c) => {
                dag.remove_arc(p, c);
                dag.add_arc(c, p)?;
            }
        }
        let touched = match m {
            Move::Add(_, c) | Move::Delete(_, c) => vec![c],
            Move::Reverse(p, c) => vec![p, c],
        };
        for v in touched {
            local[v] = score.local(v, dag.parents(v))?;
        }
        total = local.iter().sum();
        trace.push(total);
        moves.push(m);
    }
    Ok(Climb { dag, score: total, trace, moves })
}

pub fn hill_climb(
    data: &DiscreteDataset,
    candidates: &SkeletonCandidates,
    config: &LearnConfig,
) -> Result<Dag> {
    config.validate()?;
    let mut cache = ScoreCache::new(data, config.score)?;
    let names = data.variables().iter().map(|v| v.name.clone()).collect();
    Ok(hill_climb_with(&mut cache, names, candidates, config.max_parents)?.dag)
}

pub fn mmhc(data: &DiscreteDataset, config: &LearnConfig) -> Result<Dag> {
    let candidates = mmpc(data, config)?;
    hill_climb(data, &candidates, config)
}
