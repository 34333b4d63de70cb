mod common;

use common::*;
use linkpred::baselines::{
    adamic_adar, crw_score, crw_scores_from, lrw_score, lrw_scores_from, CommonNeighborWeight, Katz,
};
use linkpred::dataset::synth_planted_blocks;
use linkpred::eval::average_precision_flags;
use linkpred::local::LocalParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn common_neighbor_scores_match_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let n = rng.gen_range(2..=15);
        let p = rng.gen_range(0.1..0.7);
        let g = random_graph(&mut rng, n, p);
        let a = dense_adjacency(&g);
        let aa = brute_common_neighbor_scores(&a, |d| 1.0 / (d as f64).ln());
        let ra = brute_common_neighbor_scores(&a, |d| 1.0 / d as f64);
        for u in 0..n {
            assert_eq!(g.triangle_count(u), brute_triangles(&a, u));
            for v in 0..n {
                if u == v {
                    continue;
                }
                assert_eq!(adamic_adar(&g, u, v, CommonNeighborWeight::AdamicAdar), aa[u][v]);
                assert_eq!(adamic_adar(&g, u, v, CommonNeighborWeight::ResourceAllocation), ra[u][v]);
            }
        }
    }
}

#[test]
fn katz_matches_matrix_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.gen_range(2..=6);
        let g = random_graph(&mut rng, n, 0.5);
        if g.edge_count() == 0 {
            continue;
        }
        let (k, lambda) = dense_katz(&dense_adjacency(&g), 0.5);
        let katz = Katz::new(&g, 0.5 / lambda, 30).unwrap();
        for u in 0..n {
            let row = katz.scores_from(u);
            for v in 0..n {
                assert!((row[v] - k[(u, v)]).abs() <= 1e-8, "u={u} v={v}");
            }
        }
        checked += 1;
    }
}

#[test]
fn superposed_walk_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let n = rng.gen_range(2..=8);
        let g = random_graph(&mut rng, n, 0.4);
        let a = dense_adjacency(&g);
        for t in 1..=3 {
            for u in 0..n {
                let from = crw_scores_from(&g, u, t);
                for v in 0..n {
                    if u == v {
                        continue;
                    }
                    let exact = q_to_f64(crw_rational(&a, u, v, t));
                    assert!((crw_score(&g, u, v, t) - exact).abs() <= 1e-12);
                    assert!((from[v] - exact).abs() <= 1e-12);
                    let step = crw_rational(&a, u, v, t) - crw_rational(&a, u, v, t - 1);
                    assert!((lrw_score(&g, u, v, t) - q_to_f64(step)).abs() <= 1e-12);
                    assert!((lrw_scores_from(&g, u, t)[v] - q_to_f64(step)).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn average_precision_matches_prefix_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=40);
        let rel: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        assert_eq!(average_precision_flags(&rel), avp_by_prefixes(&rel));
    }
    let perfect = [true, true, true, false, false];
    assert_eq!(average_precision_flags(&perfect), Some(1.0));
}

#[test]
fn local_programs_are_valid_on_planted_graphs() {
    let data = synth_planted_blocks(&[30, 30, 30], 0.2, 0.02, 9).unwrap();
    let g = &data.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut optimal, mut compared) = (0, 0);
    for _ in 0..150 {
        let u = rng.gen_range(0..g.node_count());
        let v = rng.gen_range(0..g.node_count());
        if u == v {
            continue;
        }
        let c = check_local_program(g, &data.features, u, v, LocalParams::default(), 1000, &mut rng);
        if !c.optimal {
            continue;
        }
        optimal += 1;
        assert!(c.max_violation <= 1e-9, "violation {}", c.max_violation);
        if c.feasible_points > 0 {
            compared += 1;
            assert!(c.worst_gap >= -1e-12, "random point beats optimum by {}", -c.worst_gap);
        }
    }
    assert!(optimal > 50 && compared >= 5, "optimal {optimal}, compared {compared}");
}
