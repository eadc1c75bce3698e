//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line, and exits non-zero if
//! any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use csitq::asymptotics::{check_coefficient_identities, gain_ratio_closed_form, gain_ratio_limit, gain_ratio_numeric};
use csitq::capacity::{causal_capacity, closed_form_km, lemma2_min_bruteforce, min_output_entropy_km};
use csitq::channels::{
    complete_graph, cycle_graph, cyclic_shift_channel, graph_channel_uniform, noisy_complete_graph_channel,
    noisy_version, path_graph, petersen_graph, star_graph,
};
use csitq::conversion::{
    c5_angles, ea_rate_c5, ea_rate_km, induced_bsc_analytic, induced_bsc_montecarlo, induced_bsc_quantum, km_angles,
    q_mp, r_m, DEFAULT_MC_SEED,
};
use csitq::quantum::{
    haar_unitary, max_entangled, partial_trace, plus_minus_measurement, ComplexMatrix, Povm, PureState,
};
use csitq::zero_error::{
    bks_channel, classical_zero_error_n2, classical_zero_error_oneshot, ea_zero_error_protocol, is_bipartite,
    magic_square_bks, replay_zero_error, two_clique_certificate, verify_bks,
};
use csitq::ChannelWithState;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c5_classical() -> Check {
    let ch = graph_channel_uniform(&cycle_graph(5).map_err(err)?).map_err(err)?;
    let r = causal_capacity(&ch).map_err(err)?;
    ensure((r.capacity_bits - 0.8).abs() <= 1e-6, || {
        format!("C = {}", r.capacity_bits)
    })?;
    Ok(format!("C(C5) = {:.9} ({} iterations)", r.capacity_bits, r.iterations))
}

fn c5_entanglement_assisted() -> Check {
    let ch = cyclic_shift_channel(5).map_err(err)?;
    let ang = c5_angles();
    let target = (PI / 20.0).cos().powi(2);
    let an = induced_bsc_analytic(&ch, 1.0, &ang).map_err(err)?;
    let qu = induced_bsc_quantum(&ch, 1.0, &ang).map_err(err)?;
    for b in [an, qu] {
        ensure(
            (b.p_agree_given_x0 - target).abs() <= 1e-10 && (b.p_agree_given_x1 - target).abs() <= 1e-10,
            || format!("agree = ({}, {})", b.p_agree_given_x0, b.p_agree_given_x1),
        )?;
    }
    let rate = ea_rate_c5();
    ensure((0.8340..=0.8342).contains(&rate), || format!("rate {rate}"))?;
    let mc = induced_bsc_montecarlo(&ch, 1.0, &ang, 1_000_000, DEFAULT_MC_SEED).map_err(err)?;
    let z = ((1.0 - mc.estimate.crossover) - target).abs() / mc.std_err_crossover;
    ensure(z <= 4.0, || format!("Monte Carlo {z:.2} sigma off"))?;
    Ok(format!(
        "agree = {target:.10}, rate = {rate:.6}, Monte Carlo within {z:.2} sigma"
    ))
}

fn complete_graph_capacities() -> Check {
    let mut worst: f64 = 0.0;
    for m in 3..=5 {
        for p in [0.1, 0.3, 0.5, 0.8, 1.0] {
            let ba = causal_capacity(&noisy_complete_graph_channel(m, p).map_err(err)?).map_err(err)?;
            let cf = closed_form_km(m, p).map_err(err)?;
            let d = (ba.capacity_bits - cf).abs();
            ensure(d <= 1e-6, || format!("m={m} p={p}: BA {} vs {cf}", ba.capacity_bits))?;
            worst = worst.max(d);
        }
    }
    // The caption quotes outward-rounded bounds: C <= 4.02e-3, EA >= 4.67e-3.
    let c = closed_form_km(4, 0.1).map_err(err)?;
    let ea = ea_rate_km(4, 0.1).map_err(err)?;
    let tol = 5e-6;
    ensure(c <= 4.02e-3 + tol && c > 4.01e-3 - tol, || format!("C(K4,0.1) = {c}"))?;
    ensure(ea >= 4.67e-3 - tol && ea < 4.68e-3 + tol, || {
        format!("EA(K4,0.1) = {ea}")
    })?;
    Ok(format!(
        "max |BA - closed form| = {worst:.1e}; C(K4,0.1) = {c:.6e}, EA >= {ea:.6e}"
    ))
}

fn min_entropy_oracle() -> Check {
    let mut worst: f64 = 0.0;
    for m in 3..=6 {
        for p in [0.0, 0.1, 0.5, 1.0] {
            let bf = lemma2_min_bruteforce(m, p).map_err(err)?;
            let cf = min_output_entropy_km(m, p).map_err(err)?;
            let d = (bf.min_value - cf).abs();
            ensure(d <= 1e-12, || format!("m={m} p={p}: {} vs {cf}", bf.min_value))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn km_agreement() -> Check {
    let mut worst: f64 = 0.0;
    for m in 3..=8 {
        let ch = graph_channel_uniform(&complete_graph(m).map_err(err)?).map_err(err)?;
        let ang = km_angles(m).map_err(err)?;
        for (p, target) in [
            (1.0, r_m(m).map_err(err)?),
            (0.1, q_mp(m, 0.1).map_err(err)?),
            (0.5, q_mp(m, 0.5).map_err(err)?),
        ] {
            let b = induced_bsc_quantum(&ch, p, &ang).map_err(err)?;
            let d = (b.p_agree_given_x0 - target)
                .abs()
                .max((b.p_agree_given_x1 - target).abs());
            ensure(d <= 1e-10, || format!("m={m} p={p}: {b:?} vs {target}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn gain_ratio() -> Check {
    let curve = gain_ratio_numeric(8, &[1e-4]).map_err(err)?;
    let numeric = curve.samples[0].ratio;
    let closed = gain_ratio_closed_form(8).map_err(err)?;
    let expect = 3.0 / (PI / 16.0).tan().powi(2) / 63.0;
    ensure((closed - expect).abs() < 1e-14, || format!("closed form {closed}"))?;
    let rel = (numeric - closed).abs() / closed;
    ensure(rel < 0.01, || format!("ratio {numeric} vs {closed}"))?;
    let big = gain_ratio_closed_form(1000).map_err(err)?;
    let rel_lim = (big - gain_ratio_limit()).abs() / gain_ratio_limit();
    ensure(rel_lim < 1e-3, || format!("m=1000: {big}"))?;
    Ok(format!(
        "m=8: {numeric:.6} vs {closed:.6}; m=1000: {big:.6} vs 12/pi^2 = {:.6}",
        gain_ratio_limit()
    ))
}

fn bipartite_corpus() -> Check {
    let mut graphs = Vec::new();
    for m in 3..=8 {
        graphs.push((format!("C{m}"), cycle_graph(m).map_err(err)?));
    }
    for m in 4..=6 {
        graphs.push((format!("K{m}"), complete_graph(m).map_err(err)?));
    }
    for n in 2..=5 {
        graphs.push((format!("P{n}"), path_graph(n).map_err(err)?));
    }
    graphs.push(("S5".into(), star_graph(5).map_err(err)?));
    graphs.push(("Petersen".into(), petersen_graph()));
    for (name, g) in &graphs {
        let ch = graph_channel_uniform(g).map_err(err)?;
        let v = classical_zero_error_oneshot(&ch, 2).map_err(err)?;
        ensure(v.feasible == is_bipartite(g).is_bipartite(), || {
            format!("{name} disagrees")
        })?;
        if let Some(code) = &v.witness {
            ensure(replay_zero_error(&ch, code).map_err(err)?, || {
                format!("{name} witness fails replay")
            })?;
        }
    }
    Ok(format!("{} graphs agree", graphs.len()))
}

fn triangle_two_uses() -> Check {
    let ch = graph_channel_uniform(&cycle_graph(3).map_err(err)?).map_err(err)?;
    let v = classical_zero_error_n2(&ch, 2).map_err(err)?;
    ensure(!v.feasible, || "found a two-use code".into())?;
    Ok(format!("infeasible after {} nodes", v.nodes_explored))
}

fn bks_classical() -> Check {
    let set = magic_square_bks();
    let v = verify_bks(&set).map_err(err)?;
    ensure(v.holds && v.selections_checked == 4096, || format!("{v:?}"))?;
    let bch = bks_channel(&set, None).map_err(err)?;
    let z = classical_zero_error_oneshot(bch.channel(), 2).map_err(err)?;
    ensure(!z.feasible, || "found a classical zero-error bit".into())?;
    Ok(format!(
        "4096 selections covered; no code after {} nodes",
        z.nodes_explored
    ))
}

fn bks_entanglement_assisted() -> Check {
    let bch = bks_channel(&magic_square_bks(), None).map_err(err)?;
    let t = ea_zero_error_protocol(&bch).map_err(err)?;
    ensure((t.success_probability - 1.0).abs() <= 1e-12, || {
        format!("success {}", t.success_probability)
    })?;
    ensure(t.max_branch_sum_error <= 1e-12, || {
        format!("branch sums off by {}", t.max_branch_sum_error)
    })?;
    let rest: f64 = t.branches.iter().map(|b| b.receiver_probs[2].abs()).sum();
    ensure(rest <= 1e-12, || format!("third element mass {rest}"))?;
    for i in 0..3 {
        for j in 0..3 {
            let c = two_clique_certificate(&bch, i, j).map_err(err)?;
            ensure(c.holds, || format!("state ({i},{j}): {c:?}"))?;
        }
    }
    Ok(format!(
        "success = {:.15}, {} branches, third element mass {rest:.1e}",
        t.success_probability,
        t.branches.len()
    ))
}

fn property_suites() -> Check {
    // oracle equivalence on 20 grid points
    let mut cases: Vec<(ChannelWithState, _)> = vec![(cyclic_shift_channel(5).map_err(err)?, c5_angles())];
    for m in 3..=6 {
        cases.push((
            graph_channel_uniform(&complete_graph(m).map_err(err)?).map_err(err)?,
            km_angles(m).map_err(err)?,
        ));
    }
    let mut points = 0;
    for (ch, ang) in &cases {
        for p in [0.0, 0.1, 0.5, 1.0] {
            let a = induced_bsc_analytic(ch, p, ang).map_err(err)?;
            let q = induced_bsc_quantum(ch, p, ang).map_err(err)?;
            ensure(a.max_abs_diff(&q) <= 1e-10, || format!("p={p}: {a:?} vs {q:?}"))?;
            points += 1;
        }
    }

    // no-signaling: local unitaries and non-selective measurements on one side
    let pm = plus_minus_measurement();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = PureState::new(haar_unitary(4, &mut rng).column(0), vec![2, 2]).map_err(err)?;
        let before = psi.reduced(&[1]).map_err(err)?;
        let u = haar_unitary(2, &mut rng);
        let after = psi.apply_local(&u, 0).map_err(err)?.reduced(&[1]).map_err(err)?;
        ensure(before.matrix().max_abs_diff(after.matrix()) <= 1e-12, || {
            format!("seed {seed}: unitary signals")
        })?;
        let rho = psi.density();
        let mut mixed = ComplexMatrix::zeros(4, 4);
        for out in rho.measure(&pm, 0).map_err(err)? {
            if let Some(post) = out.post_state {
                mixed = &mixed + &post.matrix().scale(out.probability.into());
            }
        }
        let mixed = csitq::quantum::DensityOperator::new(mixed, vec![2, 2]).map_err(err)?;
        let after = partial_trace(&mixed, &[1]).map_err(err)?;
        ensure(before.matrix().max_abs_diff(after.matrix()) <= 1e-12, || {
            format!("seed {seed}: measurement signals")
        })?;
    }

    // ricochet: (U ⊗ I)|Phi> = (I ⊗ U^T)|Phi>
    let phi = max_entangled(4).map_err(err)?;
    for seed in 0..20u64 {
        let u = haar_unitary(4, &mut ChaCha8Rng::seed_from_u64(1000 + seed));
        let left = phi.apply_local(&u, 0).map_err(err)?;
        let right = phi.apply_local(&u.transpose(), 1).map_err(err)?;
        ensure(left.amplitudes().max_abs_diff(right.amplitudes()) <= 1e-12, || {
            format!("seed {seed}")
        })?;
        let basis: Vec<_> = (0..4).map(|k| u.column(k)).collect();
        Povm::from_basis(&basis).map_err(err)?;
    }

    // noise affinity, entrywise and through the conversion
    for m in 3..=6 {
        let base = graph_channel_uniform(&complete_graph(m).map_err(err)?).map_err(err)?;
        let ang = km_angles(m).map_err(err)?;
        let one = induced_bsc_analytic(&base, 1.0, &ang).map_err(err)?;
        for p in [0.0, 0.1, 0.37, 0.5, 1.0] {
            let noisy = noisy_version(&base, p).map_err(err)?;
            let u = 1.0 / m as f64;
            let exact = base
                .kernel_flat()
                .iter()
                .zip(noisy.kernel_flat())
                .all(|(&v, &n)| n == p * v + (1.0 - p) * u);
            ensure(exact, || format!("K{m} p={p}: kernel not affine"))?;
            let b = induced_bsc_analytic(&base, p, &ang).map_err(err)?;
            let expect = p * one.p_agree_given_x0 + (1.0 - p) / 2.0;
            ensure((b.p_agree_given_x0 - expect).abs() <= 1e-12, || {
                format!("K{m} p={p}: agree not affine")
            })?;
        }
    }

    for m in 3..=64 {
        let c = check_coefficient_identities(m).map_err(err)?;
        ensure(c.sum_is_zero && c.sum_of_squares_matches, || {
            format!("coefficient identities fail at m={m}")
        })?;
    }
    Ok(format!(
        "{points} oracle points, 50 no-signaling seeds, 20 ricochet unitaries, affinity, identities m=3..64"
    ))
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "C5 classical capacity",
            limit: Duration::from_secs(1),
            run: c5_classical,
        },
        Criterion {
            id: 2,
            name: "C5 entanglement-assisted rate",
            limit: Duration::from_secs(5),
            run: c5_entanglement_assisted,
        },
        Criterion {
            id: 3,
            name: "K_m closed form vs Blahut-Arimoto",
            limit: Duration::from_secs(30),
            run: complete_graph_capacities,
        },
        Criterion {
            id: 4,
            name: "minimum output entropy oracle",
            limit: Duration::from_secs(10),
            run: min_entropy_oracle,
        },
        Criterion {
            id: 5,
            name: "r_m and q_mp agreement",
            limit: Duration::from_secs(60),
            run: km_agreement,
        },
        Criterion {
            id: 6,
            name: "small-noise gain ratio",
            limit: Duration::from_secs(1),
            run: gain_ratio,
        },
        Criterion {
            id: 7,
            name: "one-shot zero error iff bipartite",
            limit: Duration::from_secs(10),
            run: bipartite_corpus,
        },
        Criterion {
            id: 8,
            name: "triangle, two uses, two messages",
            limit: Duration::from_secs(60),
            run: triangle_two_uses,
        },
        Criterion {
            id: 9,
            name: "B-KS channel, classical side",
            limit: Duration::from_secs(120),
            run: bks_classical,
        },
        Criterion {
            id: 10,
            name: "B-KS channel, entanglement-assisted side",
            limit: Duration::from_secs(5),
            run: bks_entanglement_assisted,
        },
        Criterion {
            id: 11,
            name: "property suites",
            limit: Duration::from_secs(120),
            run: property_suites,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:?}, limit {:?}", c.limit))
            }
        });
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {} [{:.3}s]: {detail}",
                c.id,
                c.name,
                elapsed.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {} [{:.3}s]: {why}",
                    c.id,
                    c.name,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
