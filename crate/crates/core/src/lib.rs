//! Conditional-independence tests and hybrid structure learning for discrete
//! Bayesian networks.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! computation over in-memory values: datasets, contingency tables, graphs and
//! networks. Parsing of CSV/BIF files, the benchmark harness and the command
//! line live in the companion `bnci` crate.
//!
//! The test family covers asymptotic mutual information (G²) and Pearson X²,
//! their conditional Monte Carlo permutation versions with per-stratum fixed
//! margins, and a shrinkage mutual information test that pulls the cell
//! probabilities toward a target before computing the statistic.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod citest;
pub mod data;
pub mod error;
pub mod graph;
pub mod learn;
pub mod math;
pub mod network;
pub mod rng;
pub mod score;

pub use citest::{ci_test, Method, TestConfig, TestOutcome};
pub use data::{DiscreteDataset, StratifiedTable, StratumView, Variable};
pub use error::{Error, Result};
pub use graph::{Cpdag, Dag, EdgeMark};
pub use learn::{hill_climb, mmhc, mmpc, mmpc_node, LearnConfig, SkeletonCandidates};
pub use network::{BayesNet, Cpt};
pub use score::{network_score, ScoreCache, ScoreKind, ScoreSpec, ScoreValue};
