//! Plain-text structure format.
//!
//! ```text
//! nodes: A, B, C
//! A -> B
//! B -> C
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use bnci_core::Dag;

use crate::error::{Error, Result};

pub fn parse_arcs(text: &str) -> Result<Dag> {
    let mut dag: Option<Dag> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("nodes:") {
            if dag.is_some() {
                return Err(Error::parse(i + 1, "second node declaration"));
            }
            let names: Vec<String> =
                rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            dag = Some(Dag::new(names).map_err(|e| Error::parse(i + 1, e.to_string()))?);
            continue;
        }
        let g = dag.as_mut().ok_or_else(|| Error::parse(i + 1, "arc before node declaration"))?;
        let (a, b) = line
            .split_once("->")
            .ok_or_else(|| Error::parse(i + 1, "expected 'parent -> child'"))?;
        let find = |n: &str| g.index_of(n.trim()).ok_or_else(|| Error::parse(i + 1, format!("unknown node {}", n.trim())));
        let (p, c) = (find(a)?, find(b)?);
        g.add_arc(p, c).map_err(|e| Error::parse(i + 1, e.to_string()))?;
    }
    dag.ok_or_else(|| Error::Format("missing 'nodes:' declaration".into()))
}

pub fn emit_arcs(dag: &Dag) -> String {
    let mut out = format!("nodes: {}\n", dag.names().join(", "));
    for (p, c) in dag.arcs() {
        out.push_str(&format!("{} -> {}\n", dag.name(p), dag.name(c)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_emit() {
        let text = "# chain\nnodes: A, B, C\nA -> B\n\nB -> C\n";
        let g = parse_arcs(text).unwrap();
        assert_eq!(g.arcs(), vec![(0, 1), (1, 2)]);
        assert_eq!(emit_arcs(&g), "nodes: A, B, C\nA -> B\nB -> C\n");
    }

    #[test]
    fn errors() {
        assert!(parse_arcs("A -> B\n").is_err());
        assert!(parse_arcs("nodes: A, B\nA -> C\n").is_err());
        assert!(matches!(parse_arcs("nodes: A, B\nA -> B\nB -> A\n"), Err(Error::Parse { line: 3, .. })));
    }
}
