//! Directed acyclic graphs, their Markov equivalence classes and the
//! Structural Hamming Distance.

use alloc::collections::{BTreeSet, BinaryHeap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};

/// Directed acyclic graph over named nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Empty graph. Names must be unique.
    pub fn new(names: Vec<String>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidArgument(format!("duplicate node {n}")));
            }
        }
        let p = names.len();
        Ok(Self { names, parents: vec![Vec::new(); p], children: vec![Vec::new(); p] })
    }

    pub fn from_arcs(names: Vec<String>, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(names)?;
        for &(a, b) in arcs {
            g.add_arc(a, b)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Sorted parent set.
    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_arc(&self, parent: usize, child: usize) -> bool {
        self.parents[child].binary_search(&parent).is_ok()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_arc(a, b) || self.has_arc(b, a)
    }

    /// All arcs as `(parent, child)`, sorted.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.n_nodes() {
            return Err(Error::InvalidArgument(format!("node index {v} out of range")));
        }
        Ok(())
    }

    /// Whether a directed path `from ⇝ to` exists (length ≥ 0).
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    /// Adds `parent → child`, rejecting self-loops, duplicates and cycles.
    pub fn add_arc(&mut self, parent: usize, child: usize) -> Result<()> {
        self.check_node(parent)?;
        self.check_node(child)?;
        if parent == child {
            return Err(Error::InvalidArgument(format!("self-loop on {}", self.names[parent])));
        }
        if self.has_arc(parent, child) {
            return Err(Error::InvalidArgument(format!(
                "arc {} -> {} already present",
                self.names[parent], self.names[child]
            )));
        }
        if self.has_path(child, parent) {
            return Err(Error::Cycle {
                parent: self.names[parent].clone(),
                child: self.names[child].clone(),
            });
        }
        insert_sorted(&mut self.parents[child], parent);
        insert_sorted(&mut self.children[parent], child);
        Ok(())
    }

    pub fn remove_arc(&mut self, parent: usize, child: usize) -> bool {
        match self.parents[child].binary_search(&parent) {
            Ok(pos) => {
                self.parents[child].remove(pos);
                let pos = self.children[parent].binary_search(&child).expect("mirrored");
                self.children[parent].remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    /// Parents precede children; among ready nodes the smallest name goes
    /// first.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<(&str, usize)>> = (0..self.n_nodes())
            .filter(|&v| indegree[v] == 0)
            .map(|v| Reverse((self.names[v].as_str(), v)))
            .collect();
        let mut order = Vec::with_capacity(self.n_nodes());
        while let Some(Reverse((_, v))) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse((self.names[c].as_str(), c)));
                }
            }
        }
        debug_assert_eq!(order.len(), self.n_nodes());
        order
    }

    /// Colliders `a → c ← b` with `a`, `b` non-adjacent, as `(a, c, b)` with
    /// `a < b`.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.n_nodes() {
            let ps = &self.parents[c];
            for (i, &a) in ps.iter().enumerate() {
                for &b in &ps[i + 1..] {
                    if !self.adjacent(a, b) {
                        out.push((a, c, b));
                    }
                }
            }
        }
        out
    }

    /// Whether `x` and `y` are d-separated by `z`.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> bool {
        let p = self.n_nodes();
        let mut in_z = vec![false; p];
        for &v in z {
            in_z[v] = true;
        }
        // ancestors of z, including z
        let mut anc = in_z.clone();
        let mut stack: Vec<usize> = z.to_vec();
        while let Some(v) = stack.pop() {
            for &u in &self.parents[v] {
                if !anc[u] {
                    anc[u] = true;
                    stack.push(u);
                }
            }
        }
        // (node, arrived from a child i.e. travelling up)
        let mut visited = vec![[false; 2]; p];
        let mut queue = VecDeque::new();
        queue.push_back((x, true));
        while let Some((v, up)) = queue.pop_front() {
            if visited[v][up as usize] {
                continue;
            }
            visited[v][up as usize] = true;
            if v == y && !in_z[v] {
                return false;
            }
            if up && !in_z[v] {
                for &u in &self.parents[v] {
                    queue.push_back((u, true));
                }
                for &c in &self.children[v] {
                    queue.push_back((c, false));
                }
            } else if !up {
                if !in_z[v] {
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
                if anc[v] {
                    for &u in &self.parents[v] {
                        queue.push_back((u, true));
                    }
                }
            }
        }
        true
    }

    /// Completed partially directed graph of the equivalence class.
    ///
    /// Arcs in v-structures are compelled; the Meek orientation rules R1–R3
    /// then propagate compelled directions until a fixpoint.
    pub fn to_cpdag(&self) -> Cpdag {
        let p = self.n_nodes();
        let mut adj = vec![vec![false; p]; p];
        // oriented[a][b]: a → b is compelled
        let mut oriented = vec![vec![false; p]; p];
        for (a, b) in self.arcs() {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        for (a, c, b) in self.v_structures() {
            oriented[a][c] = true;
            oriented[b][c] = true;
        }
        let undirected = |o: &Vec<Vec<bool>>, a: usize, b: usize| adj[a][b] && !o[a][b] && !o[b][a];
        loop {
            let mut changed = false;
            for a in 0..p {
                for b in 0..p {
                    if a == b || !undirected(&oriented, a, b) {
                        continue;
                    }
                    // R1: c → a − b, c and b non-adjacent
                    let r1 = (0..p).any(|c| oriented[c][a] && !adj[c][b] && c != b);
                    // R2: a → c → b with a − b
                    let r2 = || (0..p).any(|c| oriented[a][c] && oriented[c][b]);
                    // R3: a − c → b, a − d → b, c and d non-adjacent
                    let r3 = || {
                        let mids: Vec<usize> = (0..p)
                            .filter(|&c| undirected(&oriented, a, c) && oriented[c][b])
                            .collect();
                        mids.iter().enumerate().any(|(i, &c)| {
                            mids[i + 1..].iter().any(|&d| !adj[c][d])
                        })
                    };
                    if r1 || r2() || r3() {
                        oriented[a][b] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut directed = BTreeSet::new();
        let mut undirected_set = BTreeSet::new();
        for a in 0..p {
            for b in 0..p {
                if oriented[a][b] {
                    directed.insert((a, b));
                } else if a < b && adj[a][b] && !oriented[b][a] {
                    undirected_set.insert((a, b));
                }
            }
        }
        Cpdag { names: self.names.clone(), directed, undirected: undirected_set }
    }
}

fn insert_sorted(v: &mut Vec<usize>, x: usize) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

/// Edge mark between an ordered node pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeMark {
    None,
    /// `a → b`
    Forward,
    /// `a ← b`
    Backward,
    /// `a − b`
    Undirected,
}

/// Partially directed graph representing a Markov equivalence class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpdag {
    names: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    /// Stored as `(min, max)`.
    undirected: BTreeSet<(usize, usize)>,
}

impl Cpdag {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn undirected(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    pub fn mark(&self, a: usize, b: usize) -> EdgeMark {
        if self.directed.contains(&(a, b)) {
            EdgeMark::Forward
        } else if self.directed.contains(&(b, a)) {
            EdgeMark::Backward
        } else if self.undirected.contains(&(a.min(b), a.max(b))) {
            EdgeMark::Undirected
        } else {
            EdgeMark::None
        }
    }
}

/// Structural Hamming Distance between the equivalence classes of two DAGs:
/// the number of node pairs whose edge mark differs between the CPDAGs.
///
/// Nodes are matched by name, so the two graphs may list them in different
/// orders.
pub fn shd(learned: &Dag, truth: &Dag) -> Result<usize> {
    if learned.n_nodes() != truth.n_nodes() {
        return Err(Error::InvalidArgument(format!(
            "node sets differ in size: {} vs {}",
            learned.n_nodes(),
            truth.n_nodes()
        )));
    }
    let map: Vec<usize> = learned
        .names()
        .iter()
        .map(|n| {
            truth
                .index_of(n)
                .ok_or_else(|| Error::InvalidArgument(format!("node {n} missing from truth")))
        })
        .collect::<Result<_>>()?;
    let a = learned.to_cpdag();
    let b = truth.to_cpdag();
    let p = learned.n_nodes();
    let mut dist = 0;
    for u in 0..p {
        for v in u + 1..p {
            if a.mark(u, v) != b.mark(map[u], map[v]) {
                dist += 1;
            }
        }
    }
    Ok(dist)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    pub(crate) fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    fn dag(n: usize, arcs: &[(usize, usize)]) -> Dag {
        Dag::from_arcs(names(n), arcs).unwrap()
    }

    /// Every DAG obtained by orienting the skeleton of `g` that keeps its
    /// v-structures: the equivalence class, by enumeration.
    fn equivalence_class(g: &Dag) -> Vec<Dag> {
        let edges = g.arcs();
        let mut want = g.v_structures();
        want.sort_unstable();
        let mut class = Vec::new();
        for mask in 0u32..(1 << edges.len()) {
            let mut h = Dag::new(g.names().to_vec()).unwrap();
            let ok = edges.iter().enumerate().all(|(i, &(a, b))| {
                let (p, c) = if mask >> i & 1 == 0 { (a, b) } else { (b, a) };
                h.add_arc(p, c).is_ok()
            });
            if !ok {
                continue;
            }
            let mut vs = h.v_structures();
            vs.sort_unstable();
            if vs == want {
                class.push(h);
            }
        }
        class
    }

    /// Edge marks of the equivalence class: directed iff every member agrees.
    fn brute_force_marks(g: &Dag) -> Vec<Vec<EdgeMark>> {
        let p = g.n_nodes();
        let class = equivalence_class(g);
        let mut marks = vec![vec![EdgeMark::None; p]; p];
        for a in 0..p {
            for b in 0..p {
                if a == b || !g.adjacent(a, b) {
                    continue;
                }
                let fwd = class.iter().all(|h| h.has_arc(a, b));
                let bwd = class.iter().all(|h| h.has_arc(b, a));
                marks[a][b] = match (fwd, bwd) {
                    (true, _) => EdgeMark::Forward,
                    (_, true) => EdgeMark::Backward,
                    _ => EdgeMark::Undirected,
                };
            }
        }
        marks
    }

    pub(crate) fn brute_force_shd(a: &Dag, b: &Dag) -> usize {
        let ma = brute_force_marks(a);
        let mb = brute_force_marks(b);
        let p = a.n_nodes();
        (0..p)
            .flat_map(|u| (u + 1..p).map(move |v| (u, v)))
            .filter(|&(u, v)| ma[u][v] != mb[u][v])
            .count()
    }

    pub(crate) fn random_dag() -> impl Strategy<Value = Dag> {
        (2usize..=5).prop_flat_map(|p| {
            (
                Just(p),
                any::<u64>().prop_map(move |seed| {
                    use rand::seq::SliceRandom;
                    let mut order: Vec<usize> = (0..p).collect();
                    order.shuffle(&mut crate::rng::stream(seed));
                    order
                }),
                prop::collection::vec(any::<bool>(), p * (p - 1) / 2),
            )
                .prop_map(|(p, order, bits)| {
                    let mut arcs = Vec::new();
                    let mut k = 0;
                    for i in 0..p {
                        for j in i + 1..p {
                            if bits[k] {
                                arcs.push((order[i], order[j]));
                            }
                            k += 1;
                        }
                    }
                    Dag::from_arcs(names(p), &arcs).unwrap()
                })
        })
    }

    #[test]
    fn rejects_cycles_and_self_loops() {
        let mut g = dag(3, &[(0, 1), (1, 2)]);
        assert!(matches!(g.add_arc(2, 0), Err(Error::Cycle { .. })));
        assert!(g.add_arc(1, 1).is_err());
        assert!(g.add_arc(0, 1).is_err());
        assert!(g.add_arc(0, 5).is_err());
        assert!(Dag::new(vec!["A".into(), "A".into()]).is_err());
    }

    #[test]
    fn topological_examples() {
        assert_eq!(dag(2, &[]).topological_order(), vec![0, 1]);
        assert_eq!(dag(2, &[(1, 0)]).topological_order(), vec![1, 0]);
        let g = Dag::from_arcs(vec!["Z".into(), "M".into(), "A".into()], &[]).unwrap();
        assert_eq!(g.topological_order(), vec![2, 1, 0]);
    }

    #[test]
    fn cpdag_examples() {
        let single = dag(2, &[(0, 1)]).to_cpdag();
        assert_eq!(single.mark(0, 1), EdgeMark::Undirected);
        let chain = dag(3, &[(0, 1), (1, 2)]).to_cpdag();
        assert_eq!(chain.mark(0, 1), EdgeMark::Undirected);
        assert_eq!(chain.mark(1, 2), EdgeMark::Undirected);
        let collider = dag(3, &[(0, 2), (1, 2)]).to_cpdag();
        assert_eq!(collider.mark(0, 2), EdgeMark::Forward);
        assert_eq!(collider.mark(2, 1), EdgeMark::Backward);
        // collider plus a compelled descendant (R1)
        let r1 = dag(4, &[(0, 2), (1, 2), (2, 3)]).to_cpdag();
        assert_eq!(r1.mark(2, 3), EdgeMark::Forward);
    }

    #[test]
    fn shd_examples() {
        let chain = dag(3, &[(0, 1), (1, 2)]);
        assert_eq!(shd(&chain, &chain).unwrap(), 0);
        assert_eq!(shd(&dag(3, &[(0, 1)]), &chain).unwrap(), 1);
        let collider = dag(3, &[(0, 2), (1, 2)]);
        let learned = dag(3, &[(0, 2), (2, 1)]);
        assert_eq!(shd(&learned, &collider).unwrap(), 2);
        assert!(shd(&dag(2, &[]), &chain).is_err());
        let renamed = Dag::from_arcs(names(3).into_iter().rev().collect(), &[]).unwrap();
        assert_eq!(shd(&renamed, &dag(3, &[])).unwrap(), 0);
    }

    #[test]
    fn d_separation_basics() {
        let chain = dag(3, &[(0, 1), (1, 2)]);
        assert!(!chain.d_separated(0, 2, &[]));
        assert!(chain.d_separated(0, 2, &[1]));
        let collider = dag(3, &[(0, 2), (1, 2)]);
        assert!(collider.d_separated(0, 1, &[]));
        assert!(!collider.d_separated(0, 1, &[2]));
        let desc = dag(4, &[(0, 2), (1, 2), (2, 3)]);
        assert!(!desc.d_separated(0, 1, &[3]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn shd_is_a_symmetric_premetric(a in random_dag(), b in random_dag()) {
            prop_assert_eq!(shd(&a, &a).unwrap(), 0);
            if a.n_nodes() == b.n_nodes() {
                prop_assert_eq!(shd(&a, &b).unwrap(), shd(&b, &a).unwrap());
            }
        }

        #[test]
        fn cpdag_matches_enumeration(g in random_dag()) {
            let c = g.to_cpdag();
            let marks = brute_force_marks(&g);
            for a in 0..g.n_nodes() {
                for b in 0..g.n_nodes() {
                    if a != b {
                        prop_assert_eq!(c.mark(a, b), marks[a][b]);
                    }
                }
            }
        }

        #[test]
        fn equivalent_dags_share_cpdag(g in random_dag()) {
            let c = g.to_cpdag();
            for h in equivalence_class(&g) {
                prop_assert_eq!(&h.to_cpdag(), &c);
            }
        }

        #[test]
        fn topological_order_respects_arcs(g in random_dag()) {
            let order = g.topological_order();
            let mut pos = vec![0; g.n_nodes()];
            for (i, &v) in order.iter().enumerate() { pos[v] = i; }
            for (a, b) in g.arcs() { prop_assert!(pos[a] < pos[b]); }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn shd_matches_enumeration_oracle(a in random_dag(), seed in any::<u64>()) {
            // pair `a` with a random DAG on the same node count
            use rand::Rng;
            let p = a.n_nodes();
            let mut rng = crate::rng::stream(seed);
            let mut b = Dag::new(names(p)).unwrap();
            for u in 0..p {
                for v in 0..p {
                    if u != v && rng.gen_bool(0.3) {
                        let _ = b.add_arc(u, v);
                    }
                }
            }
            prop_assert_eq!(shd(&a, &b).unwrap(), brute_force_shd(&a, &b));
        }
    }
}
