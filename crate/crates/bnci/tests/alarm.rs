mod common;

use bnci::{load_csv, parse_bif, write_csv};
use bnci_core::learn::mmpc;
use bnci_core::network::{fit_mle, forward_sample};
use bnci_core::{hill_climb, BayesNet, LearnConfig, Method, ScoreSpec, TestConfig};

fn alarm() -> BayesNet {
    parse_bif(&std::fs::read_to_string(common::alarm_path()).unwrap()).unwrap()
}

#[test]
fn topological_order_respects_all_arcs() {
    let net = alarm();
    let order = net.dag().topological_order();
    assert_eq!(order.len(), 37);
    let mut pos = vec![0; 37];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    assert_eq!(net.dag().arcs().len(), 46);
    assert!(net.dag().arcs().iter().all(|&(p, c)| pos[p] < pos[c]));
}

#[test]
fn sample_of_20000_rows_round_trips_through_csv() {
    let net = alarm();
    let data = forward_sample(&net, 20_000, 5).unwrap();
    let mut buf = Vec::new();
    write_csv(&data, &mut buf).unwrap();
    let back = load_csv(buf.as_slice(), Some(net.variables())).unwrap();
    assert_eq!(back.n_vars(), 37);
    assert_eq!(back.n(), 20_000);
    assert_eq!(back, data);
}

#[test]
fn mle_converges_on_well_populated_configurations() {
    let net = alarm();
    let data = forward_sample(&net, 50_000, 6).unwrap();
    let fitted = fit_mle(net.dag(), &data).unwrap();
    let mut checked = 0;
    let mut tight = 0;
    for v in 0..net.n_nodes() {
        let counts = data.family_counts(v, net.cpt(v).parents()).unwrap();
        for (code, row) in &counts.configs {
            let total: u64 = row.iter().sum();
            if total < 500 {
                continue;
            }
            // fitted parents are sorted, declared ones need not be
            let c = *code as usize;
            let levels = net.cpt(v).config_levels(c);
            let declared = net.cpt(v).parents();
            let c_fit = fitted.cpt(v).config_index(
                fitted.cpt(v).parents().iter().map(|p| levels[declared.iter().position(|d| d == p).unwrap()]),
            );
            for (&a, &b) in net.cpt(v).row(c).iter().zip(fitted.cpt(v).row(c_fit)) {
                let se = (a * (1.0 - a) / total as f64).sqrt();
                assert!((a - b).abs() <= 5.0 * se + 1e-12, "node {v} config {c} count {total}: {a} vs {b}");
                if 4.0 * se <= 0.02 {
                    assert!((a - b).abs() <= 0.02, "node {v} config {c} count {total}: {a} vs {b}");
                    tight += 1;
                }
            }
            checked += 1;
        }
    }
    assert!(checked > 50 && tight > 100, "{checked} configurations, {tight} tight entries");
}

#[test]
fn learned_structures_stay_inside_the_skeleton() {
    let net = alarm();
    let data = forward_sample(&net, 500, 8).unwrap();
    for method in [Method::Mi, Method::MiShrink, Method::X2] {
        for score in [ScoreSpec::default(), ScoreSpec::bic()] {
            let cfg = LearnConfig::new(TestConfig::new(method), score);
            let skel = mmpc(&data, &cfg).unwrap();
            assert!(skel.is_symmetric());
            let g = hill_climb(&data, &skel, &cfg).unwrap();
            assert!(g.n_arcs() <= skel.pairs().len());
            assert!(g.arcs().iter().all(|&(a, b)| skel.contains(a, b)));
            assert_eq!(g.topological_order().len(), 37);
        }
    }
}
