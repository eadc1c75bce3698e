//! Channels with i.i.d. state, graph channels and their constructors.
//!
//! A [`ChannelWithState`] stores `N(y|x,s)` as a dense `(s, x, y)` tensor
//! together with the state distribution `P_S`. Every constructor validates
//! the stochastic invariants, so a value of this type is always a
//! well-formed channel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::{Error, Result};

/// Tolerance on row sums and on the state distribution sum.
pub const PROB_TOL: f64 = 1e-12;

/// State probabilities below this are rejected rather than clamped.
pub const MIN_STATE_PROB: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelDoc", into = "ChannelDoc")]
pub struct ChannelWithState {
    x_card: usize,
    y_card: usize,
    s_card: usize,
    kernel: Vec<f64>,
    state_dist: Vec<f64>,
    metadata: BTreeMap<String, String>,
}

/// On-disk form: the kernel is nested `[s][x][y]`.
#[derive(Serialize, Deserialize)]
struct ChannelDoc {
    x_card: usize,
    y_card: usize,
    s_card: usize,
    kernel: Vec<Vec<Vec<f64>>>,
    state_dist: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

impl TryFrom<ChannelDoc> for ChannelWithState {
    type Error = Error;

    fn try_from(doc: ChannelDoc) -> Result<Self> {
        let ch = ChannelWithState::new(doc.kernel, doc.state_dist)?;
        if (ch.x_card, ch.y_card, ch.s_card) != (doc.x_card, doc.y_card, doc.s_card) {
            return Err(Error::Shape(format!(
                "declared (x_card, y_card, s_card) = ({}, {}, {}) but kernel has ({}, {}, {})",
                doc.x_card, doc.y_card, doc.s_card, ch.x_card, ch.y_card, ch.s_card
            )));
        }
        Ok(ch.with_metadata_map(doc.metadata))
    }
}

impl From<ChannelWithState> for ChannelDoc {
    fn from(ch: ChannelWithState) -> Self {
        let kernel = (0..ch.s_card)
            .map(|s| (0..ch.x_card).map(|x| ch.row(s, x).to_vec()).collect())
            .collect();
        ChannelDoc {
            x_card: ch.x_card,
            y_card: ch.y_card,
            s_card: ch.s_card,
            kernel,
            state_dist: ch.state_dist,
            metadata: ch.metadata,
        }
    }
}

impl ChannelWithState {
    /// Builds a channel from a nested `[s][x][y]` kernel.
    pub fn new(kernel: Vec<Vec<Vec<f64>>>, state_dist: Vec<f64>) -> Result<Self> {
        let s_card = kernel.len();
        if s_card == 0 {
            return Err(Error::Shape("kernel has no states".into()));
        }
        let x_card = kernel[0].len();
        if x_card == 0 {
            return Err(Error::Shape("kernel has no inputs".into()));
        }
        let y_card = kernel[0][0].len();
        if y_card == 0 {
            return Err(Error::Shape("kernel has no outputs".into()));
        }
        let mut flat = Vec::with_capacity(s_card * x_card * y_card);
        for (s, slice) in kernel.iter().enumerate() {
            if slice.len() != x_card {
                return Err(Error::Shape(format!(
                    "state {s} has {} input rows, expected {x_card}",
                    slice.len()
                )));
            }
            for (x, row) in slice.iter().enumerate() {
                if row.len() != y_card {
                    return Err(Error::Shape(format!(
                        "row (s={s}, x={x}) has {} outputs, expected {y_card}",
                        row.len()
                    )));
                }
                flat.extend_from_slice(row);
            }
        }
        Self::from_flat(x_card, y_card, s_card, flat, state_dist)
    }

    /// Builds a channel from a flat kernel indexed `(s * x_card + x) * y_card + y`.
    pub fn from_flat(
        x_card: usize,
        y_card: usize,
        s_card: usize,
        kernel: Vec<f64>,
        state_dist: Vec<f64>,
    ) -> Result<Self> {
        if x_card == 0 || y_card == 0 || s_card == 0 {
            return Err(Error::Shape("alphabet sizes must be positive".into()));
        }
        if kernel.len() != x_card * y_card * s_card {
            return Err(Error::Shape(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                x_card * y_card * s_card
            )));
        }
        if state_dist.len() != s_card {
            return Err(Error::Shape(format!(
                "state distribution has {} entries, expected {s_card}",
                state_dist.len()
            )));
        }
        for s in 0..s_card {
            for x in 0..x_card {
                let base = (s * x_card + x) * y_card;
                let row = &kernel[base..base + y_card];
                for (y, &value) in row.iter().enumerate() {
                    if !value.is_finite() || !(0.0..=1.0 + PROB_TOL).contains(&value) {
                        return Err(Error::KernelEntry { s, x, y, value });
                    }
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    return Err(Error::RowSum { s, x, sum });
                }
            }
        }
        check_state_dist(&state_dist)?;
        Ok(ChannelWithState {
            x_card,
            y_card,
            s_card,
            kernel,
            state_dist,
            metadata: BTreeMap::new(),
        })
    }

    /// A channel without state, embedded with a single state of probability one.
    pub fn stateless(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vec![rows], vec![1.0])
    }

    pub fn x_card(&self) -> usize {
        self.x_card
    }

    pub fn y_card(&self) -> usize {
        self.y_card
    }

    pub fn s_card(&self) -> usize {
        self.s_card
    }

    pub fn state_dist(&self) -> &[f64] {
        &self.state_dist
    }

    pub fn prob(&self, s: usize, x: usize, y: usize) -> f64 {
        self.kernel[(s * self.x_card + x) * self.y_card + y]
    }

    /// `N(·|x,s)` as a slice over outputs.
    pub fn row(&self, s: usize, x: usize) -> &[f64] {
        let base = (s * self.x_card + x) * self.y_card;
        &self.kernel[base..base + self.y_card]
    }

    pub fn kernel_flat(&self) -> &[f64] {
        &self.kernel
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    fn with_metadata_map(mut self, map: BTreeMap<String, String>) -> Self {
        self.metadata.extend(map);
        self
    }

    /// Outputs reachable from input `x` in state `s`.
    ///
    /// Constructors produce exact zeros for impossible transitions, so the
    /// support is a structural property of the kernel, not a thresholded one.
    pub fn support(&self, s: usize, x: usize) -> BitSet {
        BitSet::from_indices(
            self.y_card,
            self.row(s, x)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(y, _)| y),
        )
    }

    /// Exact integer view of a deterministic kernel: `out[s][x]` is the unique
    /// output. `None` unless every row is a 0/1 indicator.
    pub fn deterministic_outputs(&self) -> Option<Vec<Vec<usize>>> {
        (0..self.s_card)
            .map(|s| {
                (0..self.x_card)
                    .map(|x| {
                        let row = self.row(s, x);
                        let mut hit = None;
                        for (y, &p) in row.iter().enumerate() {
                            if p == 1.0 && hit.is_none() {
                                hit = Some(y);
                            } else if p != 0.0 {
                                return None;
                            }
                        }
                        hit
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic_outputs().is_some()
    }

    /// Applies `perm` to output labels: output `y` becomes `perm[y]`.
    pub fn relabel_outputs(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.y_card)?;
        let mut kernel = vec![0.0; self.kernel.len()];
        for s in 0..self.s_card {
            for x in 0..self.x_card {
                let base = (s * self.x_card + x) * self.y_card;
                for y in 0..self.y_card {
                    kernel[base + perm[y]] = self.kernel[base + y];
                }
            }
        }
        Ok(ChannelWithState { kernel, ..self.clone() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates; validation failures keep their specific variant.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelDoc = serde_json::from_str(text)?;
        ChannelWithState::try_from(doc)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Shape(format!(
            "permutation of length {} for {n} labels",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Shape("not a permutation".into()));
        }
    }
    Ok(())
}

fn check_state_dist(dist: &[f64]) -> Result<()> {
    for (s, &value) in dist.iter().enumerate() {
        if !(MIN_STATE_PROB..=1.0).contains(&value) {
            return Err(Error::StateNotPositive { s, value });
        }
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::StateSum(sum));
    }
    Ok(())
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Simple undirected graph whose edges carry a fixed endpoint order
/// `s0 < s1`. Edges are kept in lexicographic order; an edge's position is
/// its state index in the graph channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct GraphSpec {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphDoc> for GraphSpec {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        GraphSpec::new(doc.vertex_count, doc.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<GraphSpec> for GraphDoc {
    fn from(g: GraphSpec) -> Self {
        GraphDoc {
            vertex_count: g.vertex_count,
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl GraphSpec {
    /// Edges may be given in either orientation; they are stored as
    /// `(min, max)` and sorted.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Graph("graph needs at least one vertex".into()));
        }
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::Graph(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{vertex_count}"
                )));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop at vertex {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Graph(format!("duplicate edge {:?}", w[0])));
        }
        Ok(GraphSpec {
            vertex_count,
            edges: normalized,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

pub fn cycle_graph(m: usize) -> Result<GraphSpec> {
    if m < 3 {
        return Err(Error::Graph(format!("cycle needs m >= 3, got {m}")));
    }
    GraphSpec::new(m, (0..m).map(|i| (i, (i + 1) % m)))
}

pub fn complete_graph(m: usize) -> Result<GraphSpec> {
    if m < 3 {
        return Err(Error::Graph(format!("complete graph needs m >= 3, got {m}")));
    }
    GraphSpec::new(m, (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))))
}

/// Path on `n` vertices.
pub fn path_graph(n: usize) -> Result<GraphSpec> {
    if n < 2 {
        return Err(Error::Graph(format!("path needs n >= 2 vertices, got {n}")));
    }
    GraphSpec::new(n, (0..n - 1).map(|i| (i, i + 1)))
}

/// Star with centre 0 and `leaves` leaves.
pub fn star_graph(leaves: usize) -> Result<GraphSpec> {
    if leaves < 1 {
        return Err(Error::Graph("star needs at least one leaf".into()));
    }
    GraphSpec::new(leaves + 1, (1..=leaves).map(|i| (0, i)))
}

/// Outer 5-cycle 0..4, inner pentagram 5..9, spokes i -- i+5.
pub fn petersen_graph() -> GraphSpec {
    let outer = (0..5).map(|i| (i, (i + 1) % 5));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
    let spokes = (0..5).map(|i| (i, i + 5));
    GraphSpec::new(10, outer.chain(inner).chain(spokes)).expect("petersen graph is simple")
}

/// Graph channel: binary input `x` selects endpoint `s_x` of edge-state `s`.
pub fn graph_channel(g: &GraphSpec, state_dist: Vec<f64>) -> Result<ChannelWithState> {
    if g.edges.is_empty() {
        return Err(Error::Graph("graph channel needs at least one edge".into()));
    }
    if state_dist.len() != g.edge_count() {
        return Err(Error::Shape(format!(
            "state distribution has {} entries for {} edges",
            state_dist.len(),
            g.edge_count()
        )));
    }
    let m = g.vertex_count;
    let mut kernel = vec![0.0; g.edge_count() * 2 * m];
    for (s, &(s0, s1)) in g.edges.iter().enumerate() {
        kernel[(s * 2) * m + s0] = 1.0;
        kernel[(s * 2 + 1) * m + s1] = 1.0;
    }
    let ch = ChannelWithState::from_flat(2, m, g.edge_count(), kernel, state_dist)?;
    Ok(ch.with_metadata("construction", "graph"))
}

pub fn graph_channel_uniform(g: &GraphSpec) -> Result<ChannelWithState> {
    graph_channel(g, uniform(g.edge_count().max(1)))
}

/// The algebraic form `Y = X + S (mod m)` with `X ∈ {0,1}` and uniform `S`.
///
/// For `m` = 5 this is the graph channel of the 5-cycle with edge `s`
/// oriented as `(s, s+1 mod 5)`.
pub fn cyclic_shift_channel(m: usize) -> Result<ChannelWithState> {
    if m < 3 {
        return Err(Error::Graph(format!("cyclic channel needs m >= 3, got {m}")));
    }
    let mut kernel = vec![0.0; m * 2 * m];
    for s in 0..m {
        for x in 0..2 {
            kernel[(s * 2 + x) * m + (s + x) % m] = 1.0;
        }
    }
    let ch = ChannelWithState::from_flat(2, m, m, kernel, uniform(m))?;
    Ok(ch.with_metadata("construction", "cyclic-shift"))
}

/// Mixes every output distribution with uniform noise:
/// `N_p = p·N + (1-p)/|Y|`.
pub fn noisy_version(ch: &ChannelWithState, p: f64) -> Result<ChannelWithState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NoiseParameter(p));
    }
    let u = 1.0 / ch.y_card as f64;
    let kernel = ch.kernel.iter().map(|&v| p * v + (1.0 - p) * u).collect();
    let noisy = ChannelWithState::from_flat(ch.x_card, ch.y_card, ch.s_card, kernel, ch.state_dist.clone())?;
    Ok(noisy
        .with_metadata_map(ch.metadata.clone())
        .with_metadata("noise_p", format!("{p}")))
}

/// Noisy version of the complete-graph channel `(K_m, Unif)`.
pub fn noisy_complete_graph_channel(m: usize, p: f64) -> Result<ChannelWithState> {
    noisy_version(&graph_channel_uniform(&complete_graph(m)?)?, p)
}

/// Allowed input sets `X_s` and a reference symbol `x_s ∈ X_s` per state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputConstraintMap {
    allowed: Vec<Vec<usize>>,
    reference: Vec<usize>,
}

impl InputConstraintMap {
    pub fn new(allowed: Vec<Vec<usize>>, reference: Vec<usize>) -> Result<Self> {
        if allowed.len() != reference.len() {
            return Err(Error::Constraints(format!(
                "{} allowed sets but {} reference symbols",
                allowed.len(),
                reference.len()
            )));
        }
        let mut sorted = Vec::with_capacity(allowed.len());
        for (s, mut set) in allowed.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(Error::Constraints(format!("state {s} allows no input")));
            }
            if set.binary_search(&reference[s]).is_err() {
                return Err(Error::Constraints(format!(
                    "reference symbol {} of state {s} is not allowed",
                    reference[s]
                )));
            }
            sorted.push(set);
        }
        Ok(InputConstraintMap {
            allowed: sorted,
            reference,
        })
    }

    /// Every input allowed in every state; reference symbol 0.
    pub fn unconstrained(x_card: usize, s_card: usize) -> Self {
        InputConstraintMap {
            allowed: vec![(0..x_card).collect(); s_card],
            reference: vec![0; s_card],
        }
    }

    pub fn state_count(&self) -> usize {
        self.allowed.len()
    }

    pub fn allowed(&self, s: usize) -> &[usize] {
        &self.allowed[s]
    }

    pub fn reference(&self, s: usize) -> usize {
        self.reference[s]
    }

    pub fn is_allowed(&self, s: usize, x: usize) -> bool {
        self.allowed[s].binary_search(&x).is_ok()
    }
}

/// Views a stateless channel with state-dependent input constraints as a
/// channel with state: a disallowed input behaves like the reference symbol.
pub fn constrained_channel(
    base: &[Vec<f64>],
    constraints: &InputConstraintMap,
    state_dist: Vec<f64>,
) -> Result<ChannelWithState> {
    let x_card = base.len();
    if x_card == 0 {
        return Err(Error::Shape("base channel has no inputs".into()));
    }
    let y_card = base[0].len();
    if base.iter().any(|r| r.len() != y_card) {
        return Err(Error::Shape("base channel rows have unequal lengths".into()));
    }
    let s_card = constraints.state_count();
    if state_dist.len() != s_card {
        return Err(Error::Shape(format!(
            "{} constrained states but state distribution has {} entries",
            s_card,
            state_dist.len()
        )));
    }
    for s in 0..s_card {
        if let Some(&x) = constraints.allowed(s).iter().find(|&&x| x >= x_card) {
            return Err(Error::Shape(format!(
                "state {s} allows input {x} but the base channel has {x_card} inputs"
            )));
        }
    }
    let mut kernel = Vec::with_capacity(s_card * x_card * y_card);
    for s in 0..s_card {
        for x in 0..x_card {
            let source = if constraints.is_allowed(s, x) {
                x
            } else {
                constraints.reference(s)
            };
            kernel.extend_from_slice(&base[source]);
        }
    }
    ChannelWithState::from_flat(x_card, y_card, s_card, kernel, state_dist)
}
