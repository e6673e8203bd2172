//! Discrete Bayesian networks: a DAG plus one conditional probability table
//! per node, so that `P(X) = Π_i P(X_i | Π_i)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::data::{DiscreteDataset, Variable};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::math::log;
use crate::rng;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Conditional probability table of one node.
///
/// Rows are indexed by parent configuration in mixed radix over `parents`
/// (first parent slowest), columns by child level.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    levels: usize,
    probs: Vec<f64>,
}

impl Cpt {
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of parent configurations `q`.
    pub fn configs(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.probs[config * self.levels..(config + 1) * self.levels]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Configuration index of the parents' levels, given in `parents` order.
    pub fn config_index(&self, parent_levels: impl IntoIterator<Item = usize>) -> usize {
        parent_levels
            .into_iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (x, &card)| acc * card + x)
    }

    /// Inverse of [`Cpt::config_index`].
    pub fn config_levels(&self, mut config: usize) -> Vec<usize> {
        let mut out = vec![0; self.parents.len()];
        for (slot, &card) in out.iter_mut().zip(&self.parent_cards).rev() {
            *slot = config % card;
            config /= card;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    name: String,
    dag: Dag,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

impl BayesNet {
    /// Assembles a network from per-node `(parents, probabilities)`.
    ///
    /// Parent order is kept as given and defines the CPT row layout. Every row
    /// must sum to 1 within 1e-6; rows off by more than 1e-12 are rescaled.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        tables: Vec<(Vec<usize>, Vec<f64>)>,
    ) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidNetwork("network has no variables".into()));
        }
        if tables.len() != variables.len() {
            return Err(Error::InvalidNetwork(format!(
                "{} variables but {} probability tables",
                variables.len(),
                tables.len()
            )));
        }
        let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
        let mut dag = Dag::new(names)?;
        let mut cpts = Vec::with_capacity(tables.len());
        for (child, (parents, mut probs)) in tables.into_iter().enumerate() {
            let var = &variables[child];
            for &p in &parents {
                if p >= variables.len() {
                    return Err(Error::InvalidNetwork(format!(
                        "{} has unknown parent index {p}",
                        var.name
                    )));
                }
                dag.add_arc(p, child).map_err(|e| match e {
                    Error::Cycle { .. } => e,
                    other => Error::InvalidNetwork(format!("{}: {other}", var.name)),
                })?;
            }
            let parent_cards: Vec<usize> = parents.iter().map(|&p| variables[p].cardinality()).collect();
            let levels = var.cardinality();
            let q: usize = parent_cards.iter().product();
            if probs.len() != q * levels {
                return Err(Error::InvalidNetwork(format!(
                    "{} expects {} probabilities, got {}",
                    var.name,
                    q * levels,
                    probs.len()
                )));
            }
            for (config, row) in probs.chunks_mut(levels).enumerate() {
                if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::InvalidNetwork(format!(
                        "{} row {config} has a negative or non-finite probability",
                        var.name
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::InvalidNetwork(format!(
                        "{} row {config} sums to {sum}",
                        var.name
                    )));
                }
                if (sum - 1.0).abs() > 1e-12 {
                    row.iter_mut().for_each(|x| *x /= sum);
                }
            }
            cpts.push(Cpt { parents, parent_cards, levels, probs });
        }
        Ok(Self { name: name.into(), dag, variables, cpts })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn cpt(&self, v: usize) -> &Cpt {
        &self.cpts[v]
    }

    pub fn n_nodes(&self) -> usize {
        self.variables.len()
    }

    /// `Σ_i q_i (r_i − 1)`.
    pub fn free_parameters(&self) -> usize {
        self.cpts.iter().map(|c| c.configs() * (c.levels - 1)).sum()
    }

    /// `P(x)` for a full assignment of level indices.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        self.cpts
            .iter()
            .enumerate()
            .map(|(v, cpt)| {
                let config = cpt.config_index(cpt.parents.iter().map(|&p| assignment[p]));
                cpt.row(config)[assignment[v]]
            })
            .product()
    }
}

/// Maps each node of `names` to the dataset column with the same name.
fn align(names: &[String], data: &DiscreteDataset) -> Result<Vec<usize>> {
    if names.len() != data.n_vars() {
        return Err(Error::InvalidArgument(format!(
            "network has {} nodes, dataset has {} variables",
            names.len(),
            data.n_vars()
        )));
    }
    names
        .iter()
        .map(|n| {
            data.index_of(n)
                .ok_or_else(|| Error::InvalidArgument(format!("dataset lacks variable {n}")))
        })
        .collect()
}

/// Ancestral sampling: nodes are visited in topological order and each is
/// drawn from its CPT row by inverse CDF, one uniform per node per row.
pub fn forward_sample(net: &BayesNet, n: usize, seed: u64) -> Result<DiscreteDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let order = net.dag.topological_order();
    let p = net.n_nodes();
    let mut columns = vec![Vec::with_capacity(n); p];
    let mut row = vec![0usize; p];
    let mut stream = rng::stream(seed);
    for _ in 0..n {
        for &v in &order {
            let cpt = &net.cpts[v];
            let config = cpt.config_index(cpt.parents.iter().map(|&u| row[u]));
            row[v] = draw_level(cpt.row(config), stream.gen::<f64>());
        }
        for (col, &x) in columns.iter_mut().zip(&row) {
            col.push(x as u32);
        }
    }
    DiscreteDataset::from_columns(net.variables.clone(), columns)
}

fn draw_level(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &pk) in probs.iter().enumerate() {
        if pk > 0.0 {
            acc += pk;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Maximum likelihood CPTs for `dag` from empirical frequencies. Parent
/// configurations absent from the data get a uniform row.
pub fn fit_mle(dag: &Dag, data: &DiscreteDataset) -> Result<BayesNet> {
    let cols = align(dag.names(), data)?;
    let variables: Vec<Variable> = cols.iter().map(|&c| data.variable(c).clone()).collect();
    let mut tables = Vec::with_capacity(dag.n_nodes());
    for v in 0..dag.n_nodes() {
        let parents = dag.parents(v).to_vec();
        let parent_cols: Vec<usize> = parents.iter().map(|&p| cols[p]).collect();
        let counts = data.family_counts(cols[v], &parent_cols)?;
        let r = counts.levels;
        let q = counts.parent_configs as usize;
        let mut probs = vec![1.0 / r as f64; q * r];
        for (code, row) in &counts.configs {
            let total: u64 = row.iter().sum();
            let dst = &mut probs[*code as usize * r..(*code as usize + 1) * r];
            for (d, &c) in dst.iter_mut().zip(row) {
                *d = c as f64 / total as f64;
            }
        }
        tables.push((parents, probs));
    }
    BayesNet::new("fitted", variables, tables)
}

/// `Σ_rows Σ_i log P(x_i | π_i)`; `-∞` as soon as one factor is zero.
pub fn log_likelihood(net: &BayesNet, data: &DiscreteDataset) -> Result<f64> {
    let names: Vec<String> = net.variables.iter().map(|v| v.name.clone()).collect();
    let cols = align(&names, data)?;
    for (v, &c) in cols.iter().enumerate() {
        if data.cardinality(c) != net.variables[v].cardinality() {
            return Err(Error::InvalidArgument(format!(
                "{} has {} levels in the network but {} in the data",
                names[v],
                net.variables[v].cardinality(),
                data.cardinality(c)
            )));
        }
    }
    let mut total = 0.0;
    for (v, cpt) in net.cpts.iter().enumerate() {
        let child = data.column(cols[v]);
        let parent_cols: Vec<&[u32]> = cpt.parents.iter().map(|&p| data.column(cols[p])).collect();
        for r in 0..data.n() {
            let config = cpt.config_index(parent_cols.iter().map(|c| c[r] as usize));
            let prob = cpt.row(config)[child[r] as usize];
            if prob <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += log(prob);
        }
    }
    Ok(total)
}
