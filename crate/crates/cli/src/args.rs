use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "csitq",
    version,
    about = "Capacities of channels with causal state information, with and without shared entanglement"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classical capacity with causal state information at the transmitter.
    Capacity {
        #[command(subcommand)]
        cmd: CapacityCmd,
    },
    /// Bell-pair conversion of a graph channel into a binary symmetric channel.
    Convert(ConvertArgs),
    /// Zero-error searches and the B-KS activation channel.
    ZeroError {
        #[command(subcommand)]
        cmd: ZeroErrorCmd,
    },
    /// Gain of the conversion rate over the classical capacity for noisy K_m.
    Asymptotics(AsymptoticsArgs),
    /// Recompute a headline result and check it against its stated value.
    Reproduce(ReproduceArgs),
    /// Write figure data (CSV) and a rendered plot (SVG).
    Figure(FigureArgs),
    /// Inspect, print and validate channel JSON files.
    Channel {
        #[command(subcommand)]
        cmd: ChannelCmd,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ChannelSource {
    /// Channel JSON file.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub channel: Option<PathBuf>,
    /// Builtin channel (see `csitq channel list`).
    #[arg(long)]
    pub builtin: Option<String>,
    /// Replace the channel by its noisy version with this p.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum CapacityCmd {
    /// Blahut-Arimoto over Shannon strategies.
    Classical {
        #[command(flatten)]
        source: ChannelSource,
        #[arg(long, default_value_t = csitq::capacity::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = csitq::capacity::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Closed-form capacity of the noisy complete-graph channel.
    KmClosedForm {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    C5,
    Km,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub graph: GraphFamily,
    /// Number of vertices for `km`.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Also run a Monte Carlo estimate with this many samples.
    #[arg(long)]
    pub mc: Option<u64>,
    #[arg(long, default_value_t = csitq::conversion::DEFAULT_MC_SEED)]
    pub seed: u64,
    /// Print a CSV row instead of a table.
    #[arg(long, conflicts_with = "json")]
    pub csv: bool,
}

#[derive(Subcommand, Debug)]
pub enum ZeroErrorCmd {
    /// Search for a classical zero-error code on a graph channel.
    Graph {
        /// Graph JSON file `{"vertex_count": n, "edges": [[a, b], ...]}`.
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        graph: Option<PathBuf>,
        /// Builtin graph: c<m>, k<m>, p<n>, star<k>, petersen.
        #[arg(long)]
        builtin: Option<String>,
        /// Number of messages.
        #[arg(long = "M", default_value_t = 2)]
        messages: usize,
        /// Number of channel uses (1 or 2).
        #[arg(short, long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        n: u8,
        #[arg(long, default_value_t = csitq::zero_error::DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Check the B-KS channel: no classical zero-error bit, one bit with entanglement.
    Bks {
        #[arg(long, value_parser = ["magic-square"], default_value = "magic-square")]
        builtin: String,
        /// Write the full protocol transcript as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct AsymptoticsArgs {
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    /// Comma-separated noise values; defaults to 10 points per decade on [1e-5, 1].
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    Thm1,
    Thm2,
    Cor1,
    Thm4,
    Thm5,
    Lemma1,
    Lemma2,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub claim: Claim,
    /// Graph size for the claims that take one.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig3,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub name: FigureName,
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ChannelCmd {
    /// List builtin channels.
    List,
    /// Print a channel as JSON.
    Show {
        path: Option<PathBuf>,
        #[arg(long, conflicts_with = "path", required_unless_present = "path")]
        builtin: Option<String>,
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Check every channel invariant of a JSON file.
    Validate { path: PathBuf },
}
