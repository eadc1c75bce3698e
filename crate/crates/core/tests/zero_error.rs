use csitq::channels::{complete_graph, cycle_graph, graph_channel_uniform, path_graph, petersen_graph, star_graph};
use csitq::zero_error::*;
use csitq::GraphSpec;

fn corpus() -> Vec<(String, GraphSpec)> {
    let mut gs = Vec::new();
    for m in 3..=8 {
        gs.push((format!("C{m}"), cycle_graph(m).unwrap()));
    }
    for m in 4..=6 {
        gs.push((format!("K{m}"), complete_graph(m).unwrap()));
    }
    for n in 2..=5 {
        gs.push((format!("P{n}"), path_graph(n).unwrap()));
    }
    gs.push(("S5".into(), star_graph(5).unwrap()));
    gs.push(("Petersen".into(), petersen_graph()));
    gs
}

#[test]
fn one_bit_zero_error_iff_bipartite() {
    for (name, g) in corpus() {
        let ch = graph_channel_uniform(&g).unwrap();
        let v = classical_zero_error_oneshot(&ch, 2).unwrap();
        assert_eq!(v.feasible, is_bipartite(&g).is_bipartite(), "{name}");
        if let Some(code) = &v.witness {
            assert!(replay_zero_error(&ch, code).unwrap(), "{name}");
            let lifted = code.lift_to_two_uses().unwrap();
            assert!(replay_zero_error(&ch, &lifted).unwrap(), "{name}");
        }
    }
}

#[test]
fn bipartite_witness_follows_the_coloring() {
    let g = cycle_graph(6).unwrap();
    let Bipartiteness::Bipartite { coloring } = is_bipartite(&g) else {
        panic!("C6 is bipartite");
    };
    for &(a, b) in g.edges() {
        assert_ne!(coloring[a], coloring[b]);
    }
}

#[test]
fn two_uses_of_a_triangle_still_carry_nothing() {
    let ch = graph_channel_uniform(&cycle_graph(3).unwrap()).unwrap();
    let v = classical_zero_error_n2(&ch, 2).unwrap();
    assert!(!v.feasible);
    assert!(v.nodes_explored > 0);
}

#[test]
fn two_uses_of_odd_cycles_and_k4_carry_nothing() {
    for g in [cycle_graph(5).unwrap(), complete_graph(4).unwrap()] {
        let ch = graph_channel_uniform(&g).unwrap();
        assert!(!classical_zero_error_n2(&ch, 2).unwrap().feasible);
    }
}

#[test]
fn two_uses_of_c4() {
    let ch = graph_channel_uniform(&cycle_graph(4).unwrap()).unwrap();
    let v = classical_zero_error_n2(&ch, 2).unwrap();
    assert!(v.feasible);
    assert!(replay_zero_error(&ch, v.witness.as_ref().unwrap()).unwrap());
    // four messages over two uses
    let v4 = classical_zero_error_n2(&ch, 4).unwrap();
    assert!(v4.feasible);
    assert!(replay_zero_error(&ch, v4.witness.as_ref().unwrap()).unwrap());
}

#[test]
fn one_message_is_always_feasible() {
    let ch = graph_channel_uniform(&cycle_graph(5).unwrap()).unwrap();
    assert!(classical_zero_error_oneshot(&ch, 1).unwrap().feasible);
    let v = classical_zero_error_n2(&ch, 1).unwrap();
    assert!(v.feasible);
    assert!(replay_zero_error(&ch, v.witness.as_ref().unwrap()).unwrap());
}

#[test]
fn budget_is_enforced() {
    let ch = graph_channel_uniform(&cycle_graph(5).unwrap()).unwrap();
    assert!(matches!(
        classical_zero_error_n2_with_budget(&ch, 2, 40),
        Err(csitq::Error::SearchBudget(40))
    ));
}

#[test]
fn weakened_magic_square_has_a_counterexample() {
    let full = magic_square_bks();
    let weak = BksSet::new(4, full.a_bases().to_vec(), full.b_bases()[..2].to_vec()).unwrap();
    let v = verify_bks(&weak).unwrap();
    assert!(!v.holds);
    let sel = v.counterexample.unwrap();
    for i in 0..3 {
        for j in 0..2 {
            let u = &weak.a_bases()[i][sel[i]];
            let w = &weak.b_bases()[j][sel[3 + j]];
            assert_ne!(dot(u, w), 0);
        }
    }
    assert!(bks_channel(&weak, None).is_err());
}

#[test]
fn identical_standard_bases_in_dimension_two_fail() {
    let e = vec![vec![1, 0], vec![0, 1]];
    let v = verify_bks(&BksSet::new(2, vec![e.clone()], vec![e]).unwrap()).unwrap();
    assert!(!v.holds);
    assert_eq!(v.counterexample, Some(vec![0, 0]));
    assert_eq!(v.selections_checked, 1);
}

#[test]
fn bks_verdict_is_invariant_under_shuffles() {
    let set = magic_square_bks();
    let mut a = set.a_bases().to_vec();
    let mut b = set.b_bases().to_vec();
    a.rotate_left(1);
    b.reverse();
    for basis in a.iter_mut().chain(b.iter_mut()) {
        basis.rotate_right(1);
    }
    assert!(
        verify_bks(&BksSet::new(4, b.clone(), a.clone()).unwrap())
            .unwrap()
            .holds
    );
    assert!(verify_bks(&BksSet::new(4, a, b).unwrap()).unwrap().holds);
}

#[test]
fn magic_square_channel_shape() {
    let bch = bks_channel(&magic_square_bks(), None).unwrap();
    let ch = bch.channel();
    assert_eq!(ch.x_card(), 24);
    assert_eq!(ch.s_card(), 9);
    for s in 0..9 {
        assert_eq!(bch.constraints().allowed(s).len(), 8);
        assert!((ch.state_dist()[s] - 1.0 / 9.0).abs() < 1e-15);
    }
    for (y, &(u, v)) in bch.outputs().iter().enumerate() {
        assert_eq!(dot(bch.vector(u), bch.vector(v)), 0);
        assert_eq!(bch.output_pair(y), (u, v));
    }
    // allowed inputs emit exactly the pairs that contain them
    for s in 0..9 {
        for &x in bch.constraints().allowed(s) {
            for y in 0..ch.y_card() {
                let (u, v) = bch.output_pair(y);
                assert_eq!(ch.prob(s, x, y) > 0.0, u == x || v == x);
            }
        }
    }
    for x in 0..24 {
        assert_eq!(bch.input_index(bch.input_label(x)), x);
    }
}

#[test]
fn magic_square_channel_has_no_classical_zero_error_bit() {
    let bch = bks_channel(&magic_square_bks(), None).unwrap();
    let v = classical_zero_error_oneshot(bch.channel(), 2).unwrap();
    assert!(!v.feasible);
}

#[test]
fn entanglement_sends_one_bit_with_certainty() {
    let bch = bks_channel(&magic_square_bks(), None).unwrap();
    let t = ea_zero_error_protocol(&bch).unwrap();
    assert!((t.success_probability - 1.0).abs() < 1e-12);
    assert!(t.max_remainder_probability <= 1e-12);
    assert!(t.max_branch_sum_error < 1e-12);
    for b in &t.branches {
        assert!((b.p_input - 0.25).abs() < 1e-12);
        // the receiver finds exactly the transmitted vector
        let hit = if b.output_pair.0 == b.input { 0 } else { 1 };
        assert!((b.receiver_probs[hit] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_clique_cover_in_every_state() {
    let bch = bks_channel(&magic_square_bks(), None).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let c = two_clique_certificate(&bch, i, j).unwrap();
            assert!(c.holds);
            assert_eq!(c.clique_sizes, (4, 4));
        }
    }
    assert!(two_clique_certificate(&bch, 3, 0).is_err());
}
