mod common;

use std::path::Path;
use std::process::{Command, Output};

fn bnci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnci")).args(args).output().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CHAIN: &str = "network chain {\n}\n\
variable A {\n  type discrete [ 2 ] { a0, a1 };\n}\n\
variable B {\n  type discrete [ 2 ] { b0, b1 };\n}\n\
variable C {\n  type discrete [ 2 ] { c0, c1 };\n}\n\
probability ( A ) {\n  table 0.5, 0.5;\n}\n\
probability ( B | A ) {\n  (a0) 0.9, 0.1;\n  (a1) 0.1, 0.9;\n}\n\
probability ( C | B ) {\n  (b0) 0.85, 0.15;\n  (b1) 0.15, 0.85;\n}\n";

#[test]
fn sample_learn_score_shd() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("chain.bif");
    std::fs::write(&net, CHAIN).unwrap();
    let data = dir.path().join("d.csv");
    ok(bnci(&["sample", "--net", s(&net), "--n", "3000", "--seed", "4", "--out", s(&data)]));
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 3001);
    assert_eq!(text.lines().next(), Some("A,B,C"));

    let arcs = dir.path().join("learned.txt");
    ok(bnci(&["learn", "--data", s(&data), "--levels", s(&net), "--method", "mi", "--out", s(&arcs)]));
    let learned = std::fs::read_to_string(&arcs).unwrap();
    assert!(learned.starts_with("nodes: A, B, C\n"));
    assert_eq!(learned.lines().count(), 3);

    assert_eq!(ok(bnci(&["shd", "--learned", s(&arcs), "--truth", s(&net)])).trim(), "0");

    let score = ok(bnci(&["score", "--data", s(&data), "--levels", s(&net), "--graph", s(&arcs), "--score", "bic"]));
    let v: serde_json::Value = serde_json::from_str(score.trim()).unwrap();
    assert_eq!(v["n"], 3000);
    assert_eq!(v["params"], 5);
    assert!(v["total"].as_f64().unwrap() < 0.0);
    assert_eq!(v["per_node"].as_object().unwrap().len(), 3);
}

#[test]
fn citest_prints_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "X,Y\n0,0\n0,0\n1,1\n1,1\n").unwrap();
    let out = ok(bnci(&[
        "citest", "--data", s(&data), "--x", "X", "--y", "Y", "--method", "mi_perm", "--permutations", "5000",
        "--seed", "3",
    ]));
    assert_eq!(out.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["method"], "mi_perm");
    assert_eq!(v["df"], 1);
    assert_eq!(v["permutations_used"], 5000);
    assert!((v["p_value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.02);

    let out = ok(bnci(&["citest", "--data", s(&data), "--x", "X", "--y", "Y", "--method", "mi_shrink"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(v["lambda"].as_f64().is_some());
}

#[test]
fn errors_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "X,Y\n0,0\n0,1,1\n").unwrap();
    let out = bnci(&["citest", "--data", s(&data), "--x", "X", "--y", "Y"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = bnci(&["citest", "--data", s(&data), "--x", "X", "--y", "Y", "--method", "bogus"]);
    assert!(!out.status.success());

    let proto = dir.path().join("p.txt");
    std::fs::write(&proto, "true_net = missing.bif\nsample_sizes = 10\ntest_pairs = mi_perm:mi\n").unwrap();
    let out = bnci(&["bench", "--protocol", s(&proto)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.bif"));
}

#[test]
fn bench_writes_exact_columns() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("chain.bif");
    std::fs::write(&net, CHAIN).unwrap();
    let proto = dir.path().join("p.txt");
    std::fs::write(
        &proto,
        "true_net = chain.bif\nsample_sizes = 30, 60\nreplicates = 2\nholdout_n = 500\n\
         test_pairs = x2_perm:x2\npermutations = 50\nmaster_seed = 5\n",
    )
    .unwrap();
    let rec = dir.path().join("r.csv");
    let sum = dir.path().join("s.csv");
    ok(bnci(&["bench", "--protocol", s(&proto), "--records", s(&rec), "--summary", s(&sum)]));
    let records = std::fs::read_to_string(&rec).unwrap();
    let mut lines = records.lines();
    assert_eq!(lines.next(), Some("test,baseline,score,alpha,n,replicate,indicator,value_alt,value_base,rel_delta"));
    assert_eq!(lines.count(), 2 * 2 * 6);
    // BDe indicators only on BDe-learned rows, BIC only on BIC-learned rows
    for line in records.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[6] == "shd" || f[6].starts_with(f[2]), "{line}");
    }
    let summary = std::fs::read_to_string(&sum).unwrap();
    assert!(summary.starts_with("test,baseline,score,alpha,n,ratio,indicator,count,min,q1,median,q3,max,mean\n"));
    assert_eq!(summary.lines().count(), 1 + 2 * 2 * 3);
}
