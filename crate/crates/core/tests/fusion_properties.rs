use dmot_core::fusion::{
    consensus_matrix_power_check, consensus_run, fuse_lmb, fuse_mdglmb, metropolis_weights, ConsensusConfig, ExchangeStats,
    NetworkGraph,
};
use dmot_core::gm::{Gaussian, GaussianMixture};
use dmot_core::labeled::{lmb_to_mdglmb, Label, LmbDensity, MdGlmbDensity};
use proptest::prelude::*;

fn node(rs: &[f64], offset: f64) -> LmbDensity {
    LmbDensity::from_entries(rs.iter().enumerate().map(|(i, r)| {
        let g = Gaussian::from_diagonal(&[i as f64 * 10.0 + offset, -offset], &[1.0 + offset.abs(), 2.0]).unwrap();
        (Label::new(0, i as u32), *r, GaussianMixture::single(g))
    }))
    .unwrap()
}

fn ring(n: usize) -> NetworkGraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    NetworkGraph::undirected(n, &edges).unwrap()
}

fn lmb_close(a: &LmbDensity, b: &LmbDensity, tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b.iter()).all(|((la, ba), (lb, bb))| {
            let (ma, mb) = (ba.pdf.mean().unwrap(), bb.pdf.mean().unwrap());
            la == lb && (ba.existence - bb.existence).abs() < tol && (ma - mb).norm() < tol
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_input_is_identity(rs in prop::collection::vec(0.05..0.95f64, 0..4), off in -3.0..3.0f64) {
        let d = node(&rs, off);
        prop_assert_eq!(fuse_lmb(&[(&d, 1.0)], None).unwrap(), d.clone());
        let m = lmb_to_mdglmb(&d, None);
        prop_assert_eq!(fuse_mdglmb(&[(&m, 1.0)], None).unwrap(), m);
    }

    #[test]
    fn fusion_is_permutation_invariant(
        rs in prop::collection::vec(prop::collection::vec(0.05..0.95f64, 3), 3),
        w in prop::collection::vec(0.1..1.0f64, 3),
    ) {
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / total).collect();
        let nodes: Vec<LmbDensity> = rs.iter().enumerate().map(|(i, r)| node(r, i as f64)).collect();
        let fwd: Vec<(&LmbDensity, f64)> = nodes.iter().zip(w.iter().copied()).collect();
        let rev: Vec<(&LmbDensity, f64)> = fwd.iter().rev().copied().collect();
        let (a, b) = (fuse_lmb(&fwd, None).unwrap(), fuse_lmb(&rev, None).unwrap());
        prop_assert!(lmb_close(&a, &b, 1e-9));
        prop_assert!(a.iter().all(|(_, e)| (0.0..=1.0).contains(&e.existence)));

        let ms: Vec<MdGlmbDensity> = nodes.iter().map(|d| lmb_to_mdglmb(d, None)).collect();
        let fwd: Vec<(&MdGlmbDensity, f64)> = ms.iter().zip(w.iter().copied()).collect();
        let rev: Vec<(&MdGlmbDensity, f64)> = fwd.iter().rev().copied().collect();
        let (a, b) = (fuse_mdglmb(&fwd, None).unwrap(), fuse_mdglmb(&rev, None).unwrap());
        prop_assert!(a.is_normalized(1e-9));
        prop_assert_eq!(a.len(), b.len());
        for ((s1, h1), (s2, h2)) in a.iter().zip(b.iter()) {
            prop_assert_eq!(s1, s2);
            prop_assert!((h1.log_weight - h2.log_weight).abs() < 1e-9);
        }
    }

    #[test]
    fn consensus_outputs_stay_valid(
        rs in prop::collection::vec(prop::collection::vec(0.05..0.95f64, 2), 5),
        rounds in 0usize..6,
    ) {
        let g = ring(5);
        let omega = metropolis_weights(&g).unwrap();
        let nodes: Vec<MdGlmbDensity> = rs.iter().enumerate().map(|(i, r)| lmb_to_mdglmb(&node(r, i as f64), None)).collect();
        let (out, stats) = consensus_run(&nodes, &g, &omega, rounds, &ConsensusConfig::default()).unwrap();
        prop_assert!(out.iter().all(|d| d.is_normalized(1e-9)));
        prop_assert_eq!(stats.messages, (rounds * 5) as u64);

        let lmbs: Vec<LmbDensity> = rs.iter().enumerate().map(|(i, r)| node(r, i as f64)).collect();
        let (out, _) = consensus_run(&lmbs, &g, &omega, rounds, &ConsensusConfig::default()).unwrap();
        prop_assert!(out.iter().all(|d| d.iter().all(|(_, b)| (0.0..=1.0).contains(&b.existence) && b.pdf.is_normalized(1e-9))));
    }

    #[test]
    fn exchange_accounting_is_additive(
        rs in prop::collection::vec(prop::collection::vec(0.05..0.95f64, 2), 4),
        a in 0usize..4,
        b in 0usize..4,
    ) {
        let g = ring(4);
        let omega = metropolis_weights(&g).unwrap();
        let cfg = ConsensusConfig::default();
        let nodes: Vec<LmbDensity> = rs.iter().enumerate().map(|(i, r)| node(r, i as f64)).collect();
        let (mid, s1) = consensus_run(&nodes, &g, &omega, a, &cfg).unwrap();
        let (end, s2) = consensus_run(&mid, &g, &omega, b, &cfg).unwrap();
        let (whole, s) = consensus_run(&nodes, &g, &omega, a + b, &cfg).unwrap();
        let mut sum = s1;
        sum += s2;
        prop_assert_eq!(sum, s);
        prop_assert_eq!(end, whole);

        let mut per_node = ExchangeStats::default();
        for d in &nodes {
            let (_, one) = consensus_run(std::slice::from_ref(d), &NetworkGraph::complete(1), &metropolis_weights(&NetworkGraph::complete(1)).unwrap(), 1, &cfg).unwrap();
            per_node += one;
        }
        let (_, first_round) = consensus_run(&nodes, &g, &omega, 1, &cfg).unwrap();
        prop_assert_eq!(per_node, first_round);
    }

    #[test]
    fn metropolis_rows_are_stochastic(n in 3usize..9) {
        let omega = metropolis_weights(&ring(n)).unwrap();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| omega.get(i, j)).sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
        }
        prop_assert!(consensus_matrix_power_check(&omega, 500).deviation < 1e-9);
    }
}
