pub mod args;
pub mod builtins;
pub mod figure;
pub mod repro;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use csitq::asymptotics::{default_p_grid, gain_ratio_numeric};
use csitq::capacity::{blahut_arimoto, closed_form_km, shannon_strategy_channel};
use csitq::channels::{complete_graph, cyclic_shift_channel, graph_channel_uniform, noisy_version};
use csitq::conversion::{
    c5_angles, ea_rate, induced_bsc_analytic, induced_bsc_montecarlo, induced_bsc_quantum, km_angles,
};
use csitq::zero_error::{
    bks_channel, classical_zero_error_n2_with_budget, classical_zero_error_oneshot_with_budget, ea_zero_error_protocol,
    is_bipartite, magic_square_bks, replay_zero_error, two_clique_certificate, verify_bks, Bipartiteness,
};
use csitq::{ChannelWithState, GraphSpec};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::args::*;
use crate::builtins::{builtin_channel, builtin_graph, BUILTIN_HELP};

#[derive(Error, Debug)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] csitq::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_channel(path: Option<&Path>, builtin: Option<&str>, noise: Option<f64>) -> Result<ChannelWithState, CliError> {
    let ch = match (path, builtin) {
        (Some(p), _) => ChannelWithState::from_json(&read(p)?)?,
        (None, Some(b)) => builtin_channel(b)?,
        (None, None) => return Err(CliError::Usage("give a channel file or --builtin".into())),
    };
    match noise {
        Some(p) => Ok(noisy_version(&ch, p)?),
        None => Ok(ch),
    }
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*).map_err(stdout_err)?
    };
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn print_rows(rows: &[(&str, String)]) -> Result<(), CliError> {
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (k, v) in rows {
        outln!("{k:<w$}  {v}");
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<u8, CliError> {
    let json = cli.json;
    match cli.command {
        Command::Capacity { cmd } => capacity(cmd, json),
        Command::Convert(a) => convert(a, json),
        Command::ZeroError { cmd } => zero_error(cmd, json),
        Command::Asymptotics(a) => asymptotics(a, json),
        Command::Reproduce(a) => reproduce(a, json),
        Command::Figure(a) => figure(a, json),
        Command::Channel { cmd } => channel(cmd, json),
    }
}

fn capacity(cmd: CapacityCmd, json: bool) -> Result<u8, CliError> {
    match cmd {
        CapacityCmd::Classical { source, tol, max_iter } => {
            let ch = load_channel(source.channel.as_deref(), source.builtin.as_deref(), source.noise)?;
            let w = shannon_strategy_channel(&ch)?;
            let r = blahut_arimoto(&w, tol, max_iter)?;
            if json {
                print_json(&json!({
                    "capacity_bits": r.capacity_bits,
                    "upper_bound": r.upper_bound(),
                    "gap_bound": r.gap_bound,
                    "iterations": r.iterations,
                    "strategies": w.strategy_count(),
                    "input_dist": r.input_dist,
                }))?;
            } else {
                print_rows(&[
                    ("capacity (bits)", format!("{:.12}", r.capacity_bits)),
                    ("upper bound", format!("{:.12}", r.upper_bound())),
                    ("iterations", r.iterations.to_string()),
                    ("strategies", w.strategy_count().to_string()),
                ])?;
            }
        }
        CapacityCmd::KmClosedForm { m, p } => {
            let c = closed_form_km(m, p)?;
            if json {
                print_json(&json!({"m": m, "p": p, "capacity_bits": c}))?;
            } else {
                outln!("{c:.15e}");
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct ConvertReport {
    graph: &'static str,
    m: usize,
    p: f64,
    agree0: f64,
    agree1: f64,
    crossover: f64,
    ea_rate: f64,
    classical_capacity: f64,
    simulation_max_diff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    montecarlo: Option<csitq::conversion::MonteCarloBsc>,
}

fn convert(a: ConvertArgs, json: bool) -> Result<u8, CliError> {
    let (name, m, ch, ang) = match a.graph {
        GraphFamily::C5 => ("c5", 5, cyclic_shift_channel(5)?, c5_angles()),
        GraphFamily::Km => (
            "km",
            a.m,
            graph_channel_uniform(&complete_graph(a.m)?)?,
            km_angles(a.m)?,
        ),
    };
    let bsc = induced_bsc_analytic(&ch, a.p, &ang)?;
    let sim = induced_bsc_quantum(&ch, a.p, &ang)?;
    let classical = match a.graph {
        GraphFamily::C5 => csitq::capacity::causal_capacity(&noisy_version(&ch, a.p)?)?.capacity_bits,
        GraphFamily::Km => closed_form_km(m, a.p)?,
    };
    let montecarlo = match a.mc {
        Some(n) => Some(induced_bsc_montecarlo(&ch, a.p, &ang, n, a.seed)?),
        None => None,
    };
    let r = ConvertReport {
        graph: name,
        m,
        p: a.p,
        agree0: bsc.p_agree_given_x0,
        agree1: bsc.p_agree_given_x1,
        crossover: bsc.crossover,
        ea_rate: ea_rate(bsc.agree())?,
        classical_capacity: classical,
        simulation_max_diff: bsc.max_abs_diff(&sim),
        montecarlo,
    };
    if json {
        print_json(&r)?;
    } else if a.csv {
        let mut header = "graph,m,p,agree0,agree1,crossover,ea_rate,classical_capacity".to_string();
        let mut row = format!(
            "{},{},{},{},{},{},{},{}",
            r.graph, r.m, r.p, r.agree0, r.agree1, r.crossover, r.ea_rate, r.classical_capacity
        );
        if let Some(mc) = &r.montecarlo {
            header.push_str(",mc_crossover,mc_std_err,mc_samples,mc_seed");
            row.push_str(&format!(
                ",{},{},{},{}",
                mc.estimate.crossover, mc.std_err_crossover, mc.samples, mc.seed
            ));
        }
        outln!("{header}\n{row}");
    } else {
        let mut rows = vec![
            ("graph", format!("{} (m = {})", r.graph, r.m)),
            ("p", r.p.to_string()),
            ("P(agree | X=0)", format!("{:.12}", r.agree0)),
            ("P(agree | X=1)", format!("{:.12}", r.agree1)),
            ("crossover", format!("{:.12}", r.crossover)),
            ("rate with entanglement", format!("{:.12e}", r.ea_rate)),
            ("classical capacity", format!("{:.12e}", r.classical_capacity)),
            ("simulation max diff", format!("{:.1e}", r.simulation_max_diff)),
        ];
        if let Some(mc) = &r.montecarlo {
            rows.push((
                "monte carlo crossover",
                format!(
                    "{:.6} +- {:.1e} ({} samples, seed {})",
                    mc.estimate.crossover, mc.std_err_crossover, mc.samples, mc.seed
                ),
            ));
        }
        print_rows(&rows)?;
    }
    Ok(0)
}

fn load_graph(path: Option<&Path>, builtin: Option<&str>) -> Result<GraphSpec, CliError> {
    match (path, builtin) {
        (Some(p), _) => Ok(serde_json::from_str(&read(p)?)?),
        (None, Some(b)) => builtin_graph(b),
        (None, None) => Err(CliError::Usage("give --graph or --builtin".into())),
    }
}

fn zero_error(cmd: ZeroErrorCmd, json: bool) -> Result<u8, CliError> {
    match cmd {
        ZeroErrorCmd::Graph {
            graph,
            builtin,
            messages,
            n,
            budget,
        } => {
            let g = load_graph(graph.as_deref(), builtin.as_deref())?;
            let ch = graph_channel_uniform(&g)?;
            let v = if n == 1 {
                classical_zero_error_oneshot_with_budget(&ch, messages, budget)?
            } else {
                classical_zero_error_n2_with_budget(&ch, messages, budget)?
            };
            let replayed = match &v.witness {
                Some(code) => Some(replay_zero_error(&ch, code)?),
                None => None,
            };
            let bip = is_bipartite(&g);
            if json {
                print_json(&json!({
                    "messages": messages,
                    "uses": n,
                    "verdict": v,
                    "witness_replayed": replayed,
                    "bipartiteness": bip,
                }))?;
            } else {
                let shape = match &bip {
                    Bipartiteness::Bipartite { .. } => "bipartite".to_string(),
                    Bipartiteness::OddCycle { cycle } => format!("odd cycle {cycle:?}"),
                };
                print_rows(&[
                    (
                        "graph",
                        format!("{} vertices, {} edges, {shape}", g.vertex_count(), g.edge_count()),
                    ),
                    ("messages", messages.to_string()),
                    ("uses", n.to_string()),
                    ("zero-error code", if v.feasible { "found" } else { "none" }.to_string()),
                    ("search nodes", v.nodes_explored.to_string()),
                    (
                        "witness replay",
                        replayed.map_or("-".to_string(), |ok| if ok { "ok" } else { "FAILED" }.to_string()),
                    ),
                ])?;
            }
            Ok(if replayed == Some(false) { 1 } else { 0 })
        }
        ZeroErrorCmd::Bks { builtin: _, report } => {
            let set = magic_square_bks();
            let verdict = verify_bks(&set)?;
            let bch = bks_channel(&set, None)?;
            let classical =
                classical_zero_error_oneshot_with_budget(bch.channel(), 2, csitq::zero_error::DEFAULT_NODE_BUDGET)?;
            let t = ea_zero_error_protocol(&bch)?;
            let mut cliques = true;
            for i in 0..set.a_bases().len() {
                for j in 0..set.b_bases().len() {
                    cliques &= two_clique_certificate(&bch, i, j)?.holds;
                }
            }
            if let Some(path) = &report {
                write(path, &serde_json::to_string_pretty(&t)?)?;
            }
            let ok = verdict.holds && !classical.feasible && (t.success_probability - 1.0).abs() <= 1e-12 && cliques;
            if json {
                print_json(&json!({
                    "bks": verdict,
                    "inputs": bch.input_count(),
                    "states": bch.channel().s_card(),
                    "outputs": bch.channel().y_card(),
                    "classical": classical,
                    "ea_success_probability": t.success_probability,
                    "ea_max_remainder_probability": t.max_remainder_probability,
                    "branches": t.branches.len(),
                    "two_clique_certificate": cliques,
                    "pass": ok,
                }))?;
            } else {
                print_rows(&[
                    (
                        "B-KS property",
                        format!("{} ({} selections)", verdict.holds, verdict.selections_checked),
                    ),
                    (
                        "channel",
                        format!(
                            "{} inputs, {} states, {} outputs",
                            bch.input_count(),
                            bch.channel().s_card(),
                            bch.channel().y_card()
                        ),
                    ),
                    (
                        "classical zero-error bit",
                        format!(
                            "{} ({} nodes)",
                            if classical.feasible { "found" } else { "none" },
                            classical.nodes_explored
                        ),
                    ),
                    ("EA success probability", format!("{:.15}", t.success_probability)),
                    ("EA branches", t.branches.len().to_string()),
                    ("two-clique certificate", cliques.to_string()),
                ])?;
                if let Some(path) = &report {
                    outln!("transcript written to {}", path.display());
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn asymptotics(a: AsymptoticsArgs, json: bool) -> Result<u8, CliError> {
    let grid = a.grid.unwrap_or_else(default_p_grid);
    let curve = gain_ratio_numeric(a.m, &grid)?;
    let text = if json {
        serde_json::to_string_pretty(&curve)? + "\n"
    } else {
        figure::curve_csv(&curve)
    };
    match &a.out {
        Some(path) => write(path, &text)?,
        None => {
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(stdout_err)?;
        }
    }
    Ok(0)
}

fn reproduce(a: ReproduceArgs, json: bool) -> Result<u8, CliError> {
    let report = repro::reproduce(a.claim, a.m)?;
    if json {
        print_json(&report)?;
    } else {
        outln!(
            "{}: {} ({:.3} s)",
            report.claim,
            if report.pass { "PASS" } else { "FAIL" },
            report.runtime_seconds
        );
        outln!("  {}", report.statement);
        for c in &report.checks {
            let computed = match c.computed.as_f64() {
                Some(v) => format!("{v:.10}"),
                None => c.computed.to_string(),
            };
            outln!(
                "  {}  {}: {computed} (expected {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.expected
            );
        }
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn figure(a: FigureArgs, json: bool) -> Result<u8, CliError> {
    let FigureName::Fig3 = a.name;
    let curve = gain_ratio_numeric(a.m, &default_p_grid())?;
    fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let csv = a.out_dir.join("fig3.csv");
    let svg = a.out_dir.join("fig3.svg");
    write(&csv, &figure::curve_csv(&curve))?;
    write(&svg, &figure::curve_svg(&curve))?;
    if json {
        print_json(&json!({"csv": csv, "svg": svg, "points": curve.samples.len()}))?;
    } else {
        outln!("{}\n{}", csv.display(), svg.display());
    }
    Ok(0)
}

fn channel(cmd: ChannelCmd, json: bool) -> Result<u8, CliError> {
    match cmd {
        ChannelCmd::List => {
            if json {
                let items: Vec<_> = BUILTIN_HELP
                    .iter()
                    .map(|(n, d)| json!({"name": n, "description": d}))
                    .collect();
                print_json(&items)?;
            } else {
                print_rows(
                    &BUILTIN_HELP
                        .iter()
                        .map(|(n, d)| (*n, d.to_string()))
                        .collect::<Vec<_>>(),
                )?;
            }
            Ok(0)
        }
        ChannelCmd::Show { path, builtin, noise } => {
            let ch = load_channel(path.as_deref(), builtin.as_deref(), noise)?;
            outln!("{}", ch.to_json()?);
            Ok(0)
        }
        ChannelCmd::Validate { path } => {
            let text = read(&path)?;
            match ChannelWithState::from_json(&text) {
                Ok(ch) => {
                    if json {
                        print_json(&json!({
                            "valid": true,
                            "x_card": ch.x_card(),
                            "y_card": ch.y_card(),
                            "s_card": ch.s_card(),
                            "deterministic": ch.is_deterministic(),
                        }))?;
                    } else {
                        outln!(
                            "valid: |X| = {}, |Y| = {}, |S| = {}{}",
                            ch.x_card(),
                            ch.y_card(),
                            ch.s_card(),
                            if ch.is_deterministic() { ", deterministic" } else { "" }
                        );
                    }
                    Ok(0)
                }
                Err(e) => {
                    if json {
                        print_json(&json!({"valid": false, "error": e.to_string()}))?;
                    } else {
                        outln!("invalid: {e}");
                    }
                    Ok(1)
                }
            }
        }
    }
}
