//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code under test except to build inputs.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use bnci_core::rng::stream;
use bnci_core::{BayesNet, Dag, Variable};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn alarm_path() -> PathBuf {
    std::env::var_os("ALARM_BIF")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/alarm.bif"))
}

pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {id:>2} {}: {name} ({detail})", if pass { "PASS" } else { "FAIL" });
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("V{i}")).collect()
}

/// Random DAG: shuffle an order, then add each forward pair with probability `p`.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                arcs.push((order[i], order[j]));
            }
        }
    }
    Dag::from_arcs(names(n), &arcs).unwrap()
}

pub fn random_net(seed: u64, max_nodes: usize) -> BayesNet {
    let mut rng = stream(seed);
    let n = rng.gen_range(2..=max_nodes);
    let dag = random_dag(&mut rng, n, 0.5);
    let vars: Vec<Variable> = (0..n)
        .map(|i| {
            let r = rng.gen_range(2..=3);
            Variable::new(format!("V{i}"), (0..r).map(|l| format!("l{l}")).collect()).unwrap()
        })
        .collect();
    let tables = (0..n)
        .map(|v| {
            let pa = dag.parents(v).to_vec();
            let q: usize = pa.iter().map(|&p| vars[p].levels.len()).product();
            let r = vars[v].levels.len();
            let mut probs = Vec::with_capacity(q * r);
            for _ in 0..q {
                let row: Vec<f64> = (0..r).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = row.iter().sum();
                probs.extend(row.iter().map(|x| x / s));
            }
            (pa, probs)
        })
        .collect();
    BayesNet::new("random", vars, tables).unwrap()
}

fn acyclic(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0; n];
    for &(_, c) in arcs {
        indeg[c] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &(p, c) in arcs {
            if p == v {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
    }
    seen == n
}

/// Every DAG on `n` labelled nodes, as arc lists.
pub fn all_dags(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut arcs = Vec::new();
        for &(a, b) in &pairs {
            match code % 3 {
                1 => arcs.push((a, b)),
                2 => arcs.push((b, a)),
                _ => {}
            }
            code /= 3;
        }
        if acyclic(n, &arcs) {
            out.push(arcs);
        }
    }
    out
}

pub type ClassKey = (BTreeSet<(usize, usize)>, BTreeSet<(usize, usize, usize)>);

/// Skeleton plus v-structures `(a, c, b)` with `a < b` non-adjacent.
pub fn class_key(arcs: &[(usize, usize)]) -> ClassKey {
    let skel: BTreeSet<(usize, usize)> = arcs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut vs = BTreeSet::new();
    for &(a, c) in arcs {
        for &(b, c2) in arcs {
            if c == c2 && a < b && !skel.contains(&(a, b)) {
                vs.insert((a, c, b));
            }
        }
    }
    (skel, vs)
}

/// Edge mark for every pair `a < b`: 0 none, 1 a→b, 2 b→a, 3 undirected,
/// computed by enumerating the orientations of the skeleton.
pub fn cpdag_marks(n: usize, arcs: &[(usize, usize)]) -> Vec<u8> {
    let key = class_key(arcs);
    let edges: Vec<(usize, usize)> = key.0.iter().copied().collect();
    let mut seen_fwd = vec![false; edges.len()];
    let mut seen_bwd = vec![false; edges.len()];
    for mask in 0u32..(1 << edges.len()) {
        let cand: Vec<(usize, usize)> = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| if mask >> i & 1 == 0 { (a, b) } else { (b, a) })
            .collect();
        if !acyclic(n, &cand) || class_key(&cand) != key {
            continue;
        }
        for i in 0..edges.len() {
            if mask >> i & 1 == 0 {
                seen_fwd[i] = true;
            } else {
                seen_bwd[i] = true;
            }
        }
    }
    let mut marks = vec![0u8; n * n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        marks[a * n + b] = match (seen_fwd[i], seen_bwd[i]) {
            (true, true) => 3,
            (true, false) => 1,
            _ => 2,
        };
    }
    marks
}

pub fn brute_force_shd(n: usize, a: &[(usize, usize)], b: &[(usize, usize)]) -> usize {
    let ma = cpdag_marks(n, a);
    let mb = cpdag_marks(n, b);
    ma.iter().zip(&mb).filter(|(x, y)| x != y).count()
}

/// Conditional mutual information in nats from a `[k][i][j]` count array.
pub fn cmi(strata: &[Vec<Vec<u64>>]) -> f64 {
    let n: u64 = strata.iter().flatten().flatten().sum();
    let mut mi = 0.0;
    for s in strata {
        let nk: u64 = s.iter().flatten().sum();
        for (i, row) in s.iter().enumerate() {
            let ni: u64 = row.iter().sum();
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let nj: u64 = s.iter().map(|r| r[j]).sum();
                let _ = i;
                mi += c as f64 / n as f64 * ((c as f64 * nk as f64) / (ni as f64 * nj as f64)).ln();
            }
        }
    }
    mi
}

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
