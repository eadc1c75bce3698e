use std::f64::consts::{PI, TAU};

use csitq::capacity::closed_form_km;
use csitq::channels::{complete_graph, cycle_graph, cyclic_shift_channel, graph_channel_uniform, star_graph};
use csitq::conversion::*;
use proptest::prelude::*;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn arrow_identities() {
    let pts = [0.0, 0.3, 1.0, PI, 4.0, 6.0];
    for &a in &pts {
        for &b in &pts {
            if a == b {
                continue;
            }
            let ab = arrow(a, b).unwrap();
            let ba = arrow(b, a).unwrap();
            let sum = reduce_angle(ab + ba - a - b);
            assert!(sum < 1e-12 || TAU - sum < 1e-12, "{a} {b}");
            // differ by exactly pi, in either direction
            assert!((reduce_angle(ba - ab) - PI).abs() < 1e-12, "{a} {b}");
        }
    }
}

#[test]
fn arrow_scheme_on_five_cycle_is_a_rotated_pentagon() {
    let edges: Vec<(usize, usize)> = (0..5).map(|s| (s, (s + 1) % 5)).collect();
    let km = arrow_angles(5, &edges).unwrap();
    let c5 = c5_angles();
    let xi_rot: Vec<f64> = c5.xi().iter().map(|v| reduce_angle(v + PI / 10.0)).collect();
    let eta_rot: Vec<f64> = c5.eta().iter().map(|v| reduce_angle(v - PI / 10.0)).collect();
    for (a, b) in sorted(km.xi().to_vec()).iter().zip(sorted(xi_rot)) {
        assert!((a - b).abs() < 1e-12);
    }
    for (a, b) in sorted(km.eta().to_vec()).iter().zip(sorted(eta_rot)) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn oracle_equivalence_grid() {
    let mut cases = vec![(cyclic_shift_channel(5).unwrap(), c5_angles())];
    for m in 3..=6 {
        cases.push((
            graph_channel_uniform(&complete_graph(m).unwrap()).unwrap(),
            km_angles(m).unwrap(),
        ));
    }
    // any graph works with the arrow scheme, not just complete ones
    let star = star_graph(4).unwrap();
    cases.push((
        graph_channel_uniform(&star).unwrap(),
        graph_arrow_angles(&star).unwrap(),
    ));
    for (ch, ang) in &cases {
        for p in [0.0, 0.1, 0.5, 1.0] {
            let a = induced_bsc_analytic(ch, p, ang).unwrap();
            let q = induced_bsc_quantum(ch, p, ang).unwrap();
            assert!(a.max_abs_diff(&q) < 1e-10, "{a:?} {q:?}");
        }
    }
}

#[test]
fn arrow_scheme_on_label_ordered_c5_edges() {
    // The graph channel of C5 orders each edge's endpoints by label, so the
    // wrap edge is (0, 4) rather than (4, 0); the arrow scheme built on those
    // edges does worse than the angles tuned for the cyclic orientation.
    let g = cycle_graph(5).unwrap();
    let ch = graph_channel_uniform(&g).unwrap();
    let edges: Vec<(usize, usize)> = g.edges().to_vec();
    let ang = arrow_angles(5, &edges).unwrap();
    let a = induced_bsc_analytic(&ch, 1.0, &ang).unwrap();
    let q = induced_bsc_quantum(&ch, 1.0, &ang).unwrap();
    assert!(a.max_abs_diff(&q) < 1e-10);
    assert!(a.agree() < (PI / 20.0).cos().powi(2));
}

#[test]
fn montecarlo_c5_and_pure_noise() {
    let ch = cyclic_shift_channel(5).unwrap();
    let mc = induced_bsc_montecarlo(&ch, 1.0, &c5_angles(), 1_000_000, DEFAULT_MC_SEED).unwrap();
    let target = (PI / 20.0).cos().powi(2);
    assert!((mc.estimate.p_agree_given_x0 - target).abs() < 4.0 * mc.std_err_agree0);
    assert!((mc.estimate.p_agree_given_x1 - target).abs() < 4.0 * mc.std_err_agree1);
    let noise = induced_bsc_montecarlo(&ch, 0.0, &c5_angles(), 200_000, 3).unwrap();
    assert!(((1.0 - noise.estimate.crossover) - 0.5).abs() < 4.0 * noise.std_err_crossover);
}

#[test]
fn ea_rate_km_takes_the_better_of_both() {
    for m in 3..=8 {
        for p in [1e-3, 0.1, 0.5, 0.9, 1.0] {
            let cl = closed_form_km(m, p).unwrap();
            let conv = ea_rate(q_mp(m, p).unwrap()).unwrap();
            let ea = ea_rate_km(m, p).unwrap();
            assert_eq!(ea, cl.max(conversion_rate_km(m, p).unwrap()));
            assert!((conv - conversion_rate_km(m, p).unwrap()).abs() < 1e-12);
        }
    }
    assert!(ea_rate_km(4, 0.1).unwrap() >= 4.67e-3);
}

#[test]
fn r_m_decreases_toward_half_plus_one_over_pi() {
    let mut prev = 0.5;
    for m in 3..=64 {
        let r = r_m(m).unwrap();
        assert!(r > 0.5 && r <= 1.0, "{m}");
        if m > 3 {
            assert!(r < prev, "{m}");
        }
        prev = r;
    }
    assert!((r_m(100_000).unwrap() - (0.5 + 1.0 / PI)).abs() < 1e-5);
    assert!((r_m(3).unwrap() - 0.9330127018922194).abs() < 1e-14);
    assert!((r_m(8).unwrap() - 0.8590956780089891).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn induced_channel_is_symmetric(m in 3usize..=7, p in 0.0f64..=1.0) {
        let ch = graph_channel_uniform(&complete_graph(m).unwrap()).unwrap();
        let b = induced_bsc_analytic(&ch, p, &km_angles(m).unwrap()).unwrap();
        prop_assert!((b.p_agree_given_x0 - b.p_agree_given_x1).abs() < 1e-12);
    }

    #[test]
    fn global_rotation_changes_nothing(theta in -10.0f64..10.0, p in 0.0f64..=1.0, m in 3usize..=6) {
        let ch = graph_channel_uniform(&complete_graph(m).unwrap()).unwrap();
        let ang = km_angles(m).unwrap();
        let a = induced_bsc_analytic(&ch, p, &ang).unwrap();
        let b = induced_bsc_analytic(&ch, p, &ang.rotated(theta)).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
        let c5 = cyclic_shift_channel(5).unwrap();
        let x = induced_bsc_quantum(&c5, p, &c5_angles()).unwrap();
        let y = induced_bsc_quantum(&c5, p, &c5_angles().rotated(theta)).unwrap();
        prop_assert!(x.max_abs_diff(&y) < 1e-12);
    }

    #[test]
    fn agreement_is_affine_in_noise(p in 0.0f64..=1.0, m in 3usize..=6) {
        let ch = graph_channel_uniform(&complete_graph(m).unwrap()).unwrap();
        let ang = km_angles(m).unwrap();
        let one = induced_bsc_analytic(&ch, 1.0, &ang).unwrap();
        let b = induced_bsc_analytic(&ch, p, &ang).unwrap();
        prop_assert!((b.agree() - (p * one.agree() + (1.0 - p) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn random_schemes_still_match_the_simulator(
        xi in proptest::collection::vec(0.0f64..TAU, 5),
        eta in proptest::collection::vec(0.0f64..TAU, 5),
        p in 0.0f64..=1.0,
    ) {
        // uneven output angles make the noise branch differ from 1/2
        let ch = cyclic_shift_channel(5).unwrap();
        let ang = AngleScheme::new(xi, eta).unwrap();
        let a = induced_bsc_analytic(&ch, p, &ang).unwrap();
        let q = simulate_conversion(&ch, p, &ang).unwrap();
        prop_assert!(a.max_abs_diff(&q.bsc) < 1e-10);
        for v in q.p_x0_given_s {
            prop_assert!((v - 0.5).abs() < 1e-12);
        }
    }
}
