use std::time::Instant;

use csitq::asymptotics::{gain_ratio_closed_form, gain_ratio_limit, gain_ratio_numeric};
use csitq::capacity::{causal_capacity, closed_form_km, lemma2_min_bruteforce, min_output_entropy_km, LEMMA2_MAX_M};
use csitq::channels::{
    complete_graph, cycle_graph, cyclic_shift_channel, graph_channel_uniform, noisy_complete_graph_channel,
    noisy_version, path_graph, petersen_graph, star_graph,
};
use csitq::conversion::{
    c5_angles, ea_rate, ea_rate_c5, ea_rate_km, induced_bsc_analytic, induced_bsc_quantum, km_angles, q_mp,
};
use csitq::zero_error::{
    bks_channel, classical_zero_error_n2, classical_zero_error_oneshot, ea_zero_error_protocol, is_bipartite,
    magic_square_bks, replay_zero_error, two_clique_certificate, verify_bks,
};
use csitq::GraphSpec;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Claim;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub computed: Value,
    pub expected: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproReport {
    pub claim: String,
    pub statement: String,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
    pub runtime_seconds: f64,
}

#[derive(Default)]
struct Checks(Vec<CheckResult>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, computed: Value, expected: impl Into<String>, pass: bool) {
        self.0.push(CheckResult {
            name: name.into(),
            computed,
            expected: expected.into(),
            pass,
        });
    }

    fn near(&mut self, name: impl Into<String>, computed: f64, target: f64, tol: f64) {
        let pass = (computed - target).abs() <= tol;
        self.push(name, json!(computed), format!("{target} +- {tol:e}"), pass);
    }

    fn within(&mut self, name: impl Into<String>, computed: f64, lo: f64, hi: f64) {
        let pass = lo <= computed && computed <= hi;
        self.push(name, json!(computed), format!("in [{lo}, {hi}]"), pass);
    }

    fn holds(&mut self, name: impl Into<String>, computed: Value, expected: impl Into<String>, pass: bool) {
        self.push(name, computed, expected, pass);
    }
}

pub fn claim_name(claim: Claim) -> &'static str {
    match claim {
        Claim::Thm1 => "thm1",
        Claim::Thm2 => "thm2",
        Claim::Cor1 => "cor1",
        Claim::Thm4 => "thm4",
        Claim::Thm5 => "thm5",
        Claim::Lemma1 => "lemma1",
        Claim::Lemma2 => "lemma2",
    }
}

pub fn reproduce(claim: Claim, m: Option<usize>) -> Result<ReproReport, CliError> {
    let start = Instant::now();
    let mut c = Checks::default();
    let statement = match claim {
        Claim::Thm1 => c5(&mut c)?,
        Claim::Thm2 => complete(&mut c, m.unwrap_or(4))?,
        Claim::Cor1 => gain(&mut c, m.unwrap_or(8))?,
        Claim::Thm4 => bipartite(&mut c)?,
        Claim::Thm5 => bks(&mut c)?,
        Claim::Lemma1 => two_uses(&mut c)?,
        Claim::Lemma2 => min_entropy(&mut c, m)?,
    };
    let pass = c.0.iter().all(|r| r.pass);
    Ok(ReproReport {
        claim: claim_name(claim).into(),
        statement: statement.into(),
        checks: c.0,
        pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

fn c5(c: &mut Checks) -> Result<&'static str, CliError> {
    let ch = cyclic_shift_channel(5)?;
    let cl = causal_capacity(&graph_channel_uniform(&cycle_graph(5)?)?)?;
    c.near("classical capacity of C5 (Blahut-Arimoto)", cl.capacity_bits, 0.8, 1e-6);
    c.holds(
        "Blahut-Arimoto gap",
        json!(cl.gap_bound),
        "<= 1e-9",
        cl.gap_bound <= 1e-9,
    );
    let a = induced_bsc_analytic(&ch, 1.0, &c5_angles())?;
    let q = induced_bsc_quantum(&ch, 1.0, &c5_angles())?;
    c.near(
        "agreement cos^2(pi/20)",
        a.agree(),
        (std::f64::consts::PI / 20.0).cos().powi(2),
        1e-12,
    );
    c.holds(
        "state-vector simulation matches the closed form",
        json!(a.max_abs_diff(&q)),
        "<= 1e-10",
        a.max_abs_diff(&q) <= 1e-10,
    );
    let ea = ea_rate(a.agree())?;
    c.within("entanglement-assisted rate", ea, 0.8340, 0.8342);
    c.near("rate matches the library constant", ea_rate_c5(), ea, 1e-12);
    c.holds(
        "entanglement beats the classical capacity",
        json!(ea - cl.upper_bound()),
        "> 0",
        ea > cl.upper_bound(),
    );
    Ok("the 5-cycle channel has classical capacity 0.8, and a Bell pair per use lifts the rate to about 0.8341")
}

fn complete(c: &mut Checks, m: usize) -> Result<&'static str, CliError> {
    for p in [0.05, 0.1, 0.3, 0.6, 1.0] {
        let ba = causal_capacity(&noisy_complete_graph_channel(m, p)?)?;
        let cf = closed_form_km(m, p)?;
        c.near(
            format!("closed form vs Blahut-Arimoto, m={m} p={p}"),
            cf,
            ba.capacity_bits,
            1e-6,
        );
    }
    let ch = graph_channel_uniform(&complete_graph(m)?)?;
    for p in [0.0, 0.1, 0.5, 1.0] {
        let q = induced_bsc_quantum(&ch, p, &km_angles(m)?)?;
        c.near(
            format!("simulated agreement is q_(m,p), m={m} p={p}"),
            q.agree(),
            q_mp(m, p)?,
            1e-10,
        );
    }
    if m == 4 {
        let cl = closed_form_km(4, 0.1)?;
        let ea = ea_rate_km(4, 0.1)?;
        // four significant figures, rounded outward
        c.within("C(K4, 0.1)", cl, 4.01e-3 - 5e-6, 4.02e-3 + 5e-6);
        c.within(
            "entanglement-assisted rate for K4, p=0.1",
            ea,
            4.67e-3 - 5e-6,
            4.68e-3 + 5e-6,
        );
        c.holds("entanglement helps at p=0.1", json!(ea / cl), "> 1", ea > cl);
    }
    Ok("closed-form capacity of the noisy complete-graph channel and the rate of its Bell-pair conversion")
}

fn gain(c: &mut Checks, m: usize) -> Result<&'static str, CliError> {
    let closed = gain_ratio_closed_form(m)?;
    let curve = gain_ratio_numeric(m, &[1e-4])?;
    let numeric = curve.samples[0].ratio;
    c.holds(
        format!("ratio at p=1e-4 within 1% of 3cot^2(pi/2m)/(m^2-1), m={m}"),
        json!(numeric),
        format!("{closed} +- 1%"),
        ((numeric - closed) / closed).abs() <= 0.01,
    );
    c.holds(
        format!("small-noise ratio exceeds 1, m={m}"),
        json!(closed),
        "> 1",
        closed > 1.0,
    );
    let limit = gain_ratio_limit();
    c.holds(
        format!("small-noise ratio below 12/pi^2, m={m}"),
        json!(closed),
        format!("< {limit}"),
        closed < limit,
    );
    let big = gain_ratio_closed_form(1000)?;
    c.holds(
        "ratio for m=1000 within 0.1% of 12/pi^2",
        json!(big),
        format!("{limit} +- 0.1%"),
        ((big - limit) / limit).abs() <= 1e-3,
    );
    Ok("as p -> 0 the entanglement gain for noisy K_m tends to 3cot^2(pi/2m)/(m^2-1), which increases to 12/pi^2")
}

fn corpus() -> Result<Vec<(String, GraphSpec)>, CliError> {
    let mut gs = Vec::new();
    for m in 3..=8 {
        gs.push((format!("C{m}"), cycle_graph(m)?));
    }
    for m in 4..=6 {
        gs.push((format!("K{m}"), complete_graph(m)?));
    }
    for n in 2..=5 {
        gs.push((format!("P{n}"), path_graph(n)?));
    }
    gs.push(("S5".into(), star_graph(5)?));
    gs.push(("Petersen".into(), petersen_graph()));
    Ok(gs)
}

fn bipartite(c: &mut Checks) -> Result<&'static str, CliError> {
    for (name, g) in corpus()? {
        let ch = graph_channel_uniform(&g)?;
        let v = classical_zero_error_oneshot(&ch, 2)?;
        let bip = is_bipartite(&g).is_bipartite();
        let replayed = match &v.witness {
            Some(code) => replay_zero_error(&ch, code)?,
            None => true,
        };
        c.holds(
            format!("{name}: one zero-error bit iff bipartite"),
            json!({"feasible": v.feasible, "bipartite": bip, "witness_replayed": replayed}),
            "feasible == bipartite",
            v.feasible == bip && replayed,
        );
    }
    Ok("a graph channel sends one bit with zero error in one use exactly when the graph is bipartite")
}

fn bks(c: &mut Checks) -> Result<&'static str, CliError> {
    let set = magic_square_bks();
    let v = verify_bks(&set)?;
    c.holds(
        "magic-square set has the B-KS property",
        json!(v.selections_checked),
        "every selection has an orthogonal cross pair",
        v.holds,
    );
    let bch = bks_channel(&set, None)?;
    let cl = classical_zero_error_oneshot(bch.channel(), 2)?;
    c.holds(
        "no classical one-shot zero-error bit",
        json!({"feasible": cl.feasible, "nodes": cl.nodes_explored}),
        "infeasible",
        !cl.feasible,
    );
    let t = ea_zero_error_protocol(&bch)?;
    c.near(
        "entanglement-assisted success probability",
        t.success_probability,
        1.0,
        1e-12,
    );
    c.holds(
        "receiver never lands outside the sent pair",
        json!(t.max_remainder_probability),
        "<= 1e-12",
        t.max_remainder_probability <= 1e-12,
    );
    let mut all = true;
    for i in 0..set.a_bases().len() {
        for j in 0..set.b_bases().len() {
            all &= two_clique_certificate(&bch, i, j)?.holds;
        }
    }
    c.holds(
        "allowed inputs split into two confusability cliques in every state",
        json!(all),
        "true",
        all,
    );
    Ok("a B-KS set yields a channel with no classical zero-error bit that sends one bit perfectly with entanglement")
}

fn two_uses(c: &mut Checks) -> Result<&'static str, CliError> {
    for (name, g) in [
        ("C3", cycle_graph(3)?),
        ("C5", cycle_graph(5)?),
        ("K4", complete_graph(4)?),
    ] {
        let ch = graph_channel_uniform(&g)?;
        let v = classical_zero_error_n2(&ch, 2)?;
        c.holds(
            format!("{name}: no two-use code for 2 messages"),
            json!({"feasible": v.feasible, "nodes": v.nodes_explored}),
            "infeasible",
            !v.feasible,
        );
    }
    let ch = graph_channel_uniform(&cycle_graph(4)?)?;
    let v = classical_zero_error_n2(&ch, 2)?;
    let replayed = match &v.witness {
        Some(code) => replay_zero_error(&ch, code)?,
        None => false,
    };
    c.holds(
        "C4: two-use code exists and replays",
        json!(replayed),
        "true",
        v.feasible && replayed,
    );
    Ok("a non-bipartite graph channel cannot send one bit with zero error in two uses either")
}

fn min_entropy(c: &mut Checks, m: Option<usize>) -> Result<&'static str, CliError> {
    let ms: Vec<usize> = match m {
        Some(m) if !(3..=LEMMA2_MAX_M).contains(&m) => {
            return Err(CliError::Usage(format!(
                "lemma2 enumerates m in 3..={LEMMA2_MAX_M}, got {m}"
            )))
        }
        Some(m) => vec![m],
        None => (3..=6).collect(),
    };
    for m in ms {
        for p in [0.0, 0.1, 0.5, 1.0] {
            let brute = lemma2_min_bruteforce(m, p)?;
            let closed = min_output_entropy_km(m, p)?;
            c.near(
                format!("min output entropy, m={m} p={p}"),
                brute.min_value,
                closed,
                1e-12,
            );
        }
        let v = lemma2_min_bruteforce(m, 1.0)?.v;
        let staircase: Vec<f64> = (0..m).map(|k| (m - 1 - k) as f64 / (m * (m - 1) / 2) as f64).collect();
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let diff = sorted
            .iter()
            .zip(&staircase)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        c.near(
            format!("minimiser is the staircase distribution, m={m}"),
            diff,
            0.0,
            1e-12,
        );
    }
    // the same value through the full noisy channel
    let ch = noisy_version(&graph_channel_uniform(&complete_graph(4)?)?, 0.5)?;
    let ba = causal_capacity(&ch)?;
    c.near(
        "capacity via the minimum, m=4 p=0.5",
        ba.capacity_bits,
        closed_form_km(4, 0.5)?,
        1e-6,
    );
    Ok("among binary strategies on K_m the output entropy is minimised by a transitive tournament")
}
