use csitq::channels::{
    complete_graph, cycle_graph, cyclic_shift_channel, graph_channel_uniform, path_graph, petersen_graph, star_graph,
};
use csitq::zero_error::{bks_channel, magic_square_bks};
use csitq::{ChannelWithState, GraphSpec};

use crate::CliError;

pub const BUILTIN_HELP: &[(&str, &str)] = &[
    ("c<m>", "graph channel of the m-cycle, uniform state (m >= 3)"),
    (
        "k<m>",
        "graph channel of the complete graph K_m, uniform state (m >= 3)",
    ),
    ("p<n>", "graph channel of the path on n vertices"),
    ("star<k>", "graph channel of the star with k leaves"),
    ("petersen", "graph channel of the Petersen graph"),
    ("shift<m>", "Y = X + S mod m with uniform state (c5-shift is shift5)"),
    (
        "bks-magic-square",
        "24-input activation channel built from the magic-square B-KS set",
    ),
];

fn suffix_number(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok()
}

pub fn builtin_graph(name: &str) -> Result<GraphSpec, CliError> {
    let name = name.to_ascii_lowercase();
    let g = if name == "petersen" {
        petersen_graph()
    } else if let Some(k) = suffix_number(&name, "star") {
        star_graph(k)?
    } else if let Some(m) = suffix_number(&name, "c") {
        cycle_graph(m)?
    } else if let Some(m) = suffix_number(&name, "k") {
        complete_graph(m)?
    } else if let Some(n) = suffix_number(&name, "p") {
        path_graph(n)?
    } else {
        return Err(CliError::Usage(format!("unknown builtin graph `{name}`")));
    };
    Ok(g)
}

pub fn builtin_channel(name: &str) -> Result<ChannelWithState, CliError> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "bks-magic-square" | "magic-square" => Ok(bks_channel(&magic_square_bks(), None)?.channel().clone()),
        "c5-shift" => Ok(cyclic_shift_channel(5)?),
        _ => {
            if let Some(m) = suffix_number(&lower, "shift") {
                return Ok(cyclic_shift_channel(m)?);
            }
            Ok(graph_channel_uniform(&builtin_graph(&lower)?)?)
        }
    }
}
