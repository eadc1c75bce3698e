//! Zero-error coding: exhaustive classical searches for one and two channel
//! uses, bipartiteness of graph channels, Bell–Kochen–Specker (B-KS) sets,
//! the activation channel built from them, and the entanglement-assisted
//! protocol that sends one bit over it with certainty.
//!
//! Reachability and orthogonality are exact (bitsets, integer dot
//! products). Floats appear only in the quantum protocol simulation.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::bitset::BitSet;
use crate::channels::{constrained_channel, uniform, GraphSpec, InputConstraintMap};
use crate::quantum::{max_entangled, ComplexMatrix, ComplexVector, Povm};
use crate::{ChannelWithState, Error, Result};

/// Default node budget for the backtracking searches.
pub const DEFAULT_NODE_BUDGET: u64 = 1 << 28;

/// Largest `d^(a+b)` that [`verify_bks`] will enumerate.
pub const MAX_BKS_SELECTIONS: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Bipartiteness {
    /// `coloring[v]` is 0 or 1 and every edge joins different colors.
    Bipartite { coloring: Vec<u8> },
    /// Vertices of an odd cycle, in order.
    OddCycle { cycle: Vec<usize> },
}

impl Bipartiteness {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartiteness::Bipartite { .. })
    }
}

/// BFS 2-coloring.
pub fn is_bipartite(g: &GraphSpec) -> Bipartiteness {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut color: Vec<Option<u8>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].expect("queued vertices are colored");
            for &v in &adj[u] {
                match color[v] {
                    None => {
                        color[v] = Some(1 - cu);
                        parent[v] = u;
                        depth[v] = depth[u] + 1;
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => {
                        return Bipartiteness::OddCycle {
                            cycle: tree_cycle(u, v, &parent, &depth),
                        };
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Bipartiteness::Bipartite {
        coloring: color.into_iter().map(|c| c.unwrap_or(0)).collect(),
    }
}

/// Cycle closed by the non-tree edge `(u, v)` in a BFS forest.
fn tree_cycle(mut u: usize, mut v: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let mut left = vec![u];
    let mut right = vec![v];
    while depth[u] > depth[v] {
        u = parent[u];
        left.push(u);
    }
    while depth[v] > depth[u] {
        v = parent[v];
        right.push(v);
    }
    while u != v {
        u = parent[u];
        v = parent[v];
        left.push(u);
        right.push(v);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

/// Deterministic causal code: `encoders[w][t][prefix]` is the input sent at
/// use `t` for message `w`, where `prefix` is the state history
/// `s_1..s_{t+1}` read as a base-|S| number with `s_1` most significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroErrorCode {
    pub uses: usize,
    pub s_card: usize,
    pub encoders: Vec<Vec<Vec<usize>>>,
}

impl ZeroErrorCode {
    pub fn messages(&self) -> usize {
        self.encoders.len()
    }

    /// Repeats a one-use code over two uses, ignoring the first state on
    /// the second use.
    pub fn lift_to_two_uses(&self) -> Result<ZeroErrorCode> {
        if self.uses != 1 {
            return Err(Error::Argument(format!(
                "expected a one-use code, got {} uses",
                self.uses
            )));
        }
        let s = self.s_card;
        let encoders = self
            .encoders
            .iter()
            .map(|enc| {
                let first = enc[0].clone();
                let second = (0..s * s).map(|prefix| first[prefix % s]).collect();
                vec![first, second]
            })
            .collect();
        Ok(ZeroErrorCode {
            uses: 2,
            s_card: s,
            encoders,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroErrorVerdict {
    pub feasible: bool,
    pub witness: Option<ZeroErrorCode>,
    pub nodes_explored: u64,
}

/// Independent check of a code: enumerates every state sequence and every
/// output sequence of positive probability, and reports whether the
/// messages' output sets are pairwise disjoint.
pub fn replay_zero_error(ch: &ChannelWithState, code: &ZeroErrorCode) -> Result<bool> {
    let (nx, ny, ns) = (ch.x_card(), ch.y_card(), ch.s_card());
    if code.s_card != ns {
        return Err(Error::Shape(format!("code has {} states, channel {ns}", code.s_card)));
    }
    let seqs = ns
        .checked_pow(code.uses as u32)
        .ok_or_else(|| Error::Argument("too many uses".into()))?;
    let mut seen: Vec<HashSet<Vec<usize>>> = Vec::with_capacity(code.messages());
    for enc in &code.encoders {
        if enc.len() != code.uses {
            return Err(Error::Shape("encoder length differs from the number of uses".into()));
        }
        let mut outs = HashSet::new();
        for seq in 0..seqs {
            let mut states = vec![0; code.uses];
            let mut r = seq;
            for t in (0..code.uses).rev() {
                states[t] = r % ns;
                r /= ns;
            }
            let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
            let mut prefix = 0;
            for t in 0..code.uses {
                prefix = prefix * ns + states[t];
                let x = *enc[t]
                    .get(prefix)
                    .ok_or_else(|| Error::Shape("encoder table too short".into()))?;
                if x >= nx {
                    return Err(Error::Shape(format!("input {x} out of range")));
                }
                let ys: Vec<usize> = (0..ny).filter(|&y| ch.prob(states[t], x, y) > 0.0).collect();
                partial = partial
                    .into_iter()
                    .flat_map(|p| {
                        ys.iter().map(move |&y| {
                            let mut q = p.clone();
                            q.push(y);
                            q
                        })
                    })
                    .collect();
            }
            outs.extend(partial);
        }
        seen.push(outs);
    }
    for a in 0..seen.len() {
        for b in a + 1..seen.len() {
            if !seen[a].is_disjoint(&seen[b]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Inputs of state `s` with pairwise distinct reachable sets, each with its
/// reachable set. Inputs with identical reachable sets are interchangeable.
fn distinct_inputs(ch: &ChannelWithState, s: usize) -> Vec<(usize, BitSet)> {
    let mut out: Vec<(usize, BitSet)> = Vec::new();
    for x in 0..ch.x_card() {
        let reach = ch.support(s, x);
        if !out.iter().any(|(_, r)| *r == reach) {
            out.push((x, reach));
        }
    }
    out
}

/// One decision: the input for `message` in some context, chosen from
/// candidates paired with their reachable output sets.
struct Var {
    message: usize,
    cands: Vec<(usize, BitSet)>,
}

/// Backtracking over `vars` in order. A candidate is compatible when its
/// reachable set misses the union of every other message's reachable sets
/// so far; after each assignment every later variable must keep at least
/// one compatible candidate.
struct Search<'a> {
    vars: Vec<Var>,
    messages: usize,
    out_len: usize,
    /// The first `symmetric` variables belong to messages `0, 1, ...` and
    /// share one candidate list; interchangeable messages let them take
    /// strictly increasing candidates.
    symmetric: usize,
    nodes: &'a mut u64,
    budget: u64,
}

impl Search<'_> {
    /// Chosen input per variable, or `None` if infeasible.
    fn run(mut self) -> Result<Option<Vec<usize>>> {
        let mut unions = vec![BitSet::new(self.out_len); self.messages];
        let mut choice = vec![0usize; self.vars.len()];
        if !self.forward_ok(0, &unions) || !self.assign(0, &mut unions, &mut choice)? {
            return Ok(None);
        }
        Ok(Some(
            choice
                .iter()
                .zip(&self.vars)
                .map(|(&ci, var)| var.cands[ci].0)
                .collect(),
        ))
    }

    fn compatible(w: usize, reach: &BitSet, unions: &[BitSet]) -> bool {
        unions.iter().enumerate().all(|(o, u)| o == w || !u.intersects(reach))
    }

    fn forward_ok(&self, from: usize, unions: &[BitSet]) -> bool {
        self.vars[from..]
            .iter()
            .all(|var| var.cands.iter().any(|(_, r)| Self::compatible(var.message, r, unions)))
    }

    fn assign(&mut self, v: usize, unions: &mut [BitSet], choice: &mut [usize]) -> Result<bool> {
        if v == self.vars.len() {
            return Ok(true);
        }
        let w = self.vars[v].message;
        for ci in 0..self.vars[v].cands.len() {
            if v > 0 && v < self.symmetric && ci <= choice[v - 1] {
                continue;
            }
            if !Self::compatible(w, &self.vars[v].cands[ci].1, unions) {
                continue;
            }
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Err(Error::SearchBudget(self.budget));
            }
            let saved = unions[w].clone();
            unions[w].union_with(&self.vars[v].cands[ci].1);
            choice[v] = ci;
            if self.forward_ok(v + 1, unions) && self.assign(v + 1, unions, choice)? {
                return Ok(true);
            }
            unions[w] = saved;
        }
        Ok(false)
    }
}

fn check_messages(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Argument("need at least one message".into()));
    }
    Ok(())
}

fn single_message(ch: &ChannelWithState, uses: usize) -> ZeroErrorVerdict {
    let s = ch.s_card();
    let encoders = vec![(1..=uses).map(|t| vec![0; s.pow(t as u32)]).collect()];
    ZeroErrorVerdict {
        feasible: true,
        witness: Some(ZeroErrorCode {
            uses,
            s_card: s,
            encoders,
        }),
        nodes_explored: 0,
    }
}

/// Is there a one-use code with `m` messages and zero error?
pub fn classical_zero_error_oneshot(ch: &ChannelWithState, m: usize) -> Result<ZeroErrorVerdict> {
    classical_zero_error_oneshot_with_budget(ch, m, DEFAULT_NODE_BUDGET)
}

pub fn classical_zero_error_oneshot_with_budget(
    ch: &ChannelWithState,
    m: usize,
    budget: u64,
) -> Result<ZeroErrorVerdict> {
    check_messages(m)?;
    if m == 1 {
        return Ok(single_message(ch, 1));
    }
    let ns = ch.s_card();
    let mut vars = Vec::with_capacity(ns * m);
    for s in 0..ns {
        let cands = distinct_inputs(ch, s);
        for w in 0..m {
            vars.push(Var {
                message: w,
                cands: cands.clone(),
            });
        }
    }
    let mut nodes = 0;
    let found = Search {
        vars,
        messages: m,
        out_len: ch.y_card(),
        symmetric: m,
        nodes: &mut nodes,
        budget,
    }
    .run()?;
    let witness = found.map(|inputs| ZeroErrorCode {
        uses: 1,
        s_card: ns,
        encoders: (0..m)
            .map(|w| vec![(0..ns).map(|s| inputs[s * m + w]).collect()])
            .collect(),
    });
    Ok(ZeroErrorVerdict {
        feasible: witness.is_some(),
        witness,
        nodes_explored: nodes,
    })
}

/// Groups `(message, first state)` items whose first-use reachable sets
/// overlap, transitively. Items in different groups can never produce the
/// same output pair, so their second-use choices are independent.
fn overlap_groups(first_reach: &[Vec<&BitSet>]) -> Vec<Vec<(usize, usize)>> {
    let items: Vec<(usize, usize)> = (0..first_reach.len())
        .flat_map(|w| (0..first_reach[w].len()).map(move |s| (w, s)))
        .collect();
    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..items.len() {
        for b in a + 1..items.len() {
            let (ra, rb) = (first_reach[items[a].0][items[a].1], first_reach[items[b].0][items[b].1]);
            if ra.intersects(rb) {
                let (pa, pb) = (find(&mut parent, a), find(&mut parent, b));
                parent[pa] = pb;
            }
        }
    }
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut slot = vec![usize::MAX; items.len()];
    for (i, &item) in items.iter().enumerate() {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(item);
    }
    groups
}

/// Is there a two-use causal code with `m` messages and zero error?
///
/// The first-use encoders are enumerated (messages sorted, inputs with
/// equal reachable sets merged). For each, the second-use encoders
/// `phi2(w, s1, s2)` are found by backtracking over output pairs, one
/// overlap group at a time.
pub fn classical_zero_error_n2(ch: &ChannelWithState, m: usize) -> Result<ZeroErrorVerdict> {
    classical_zero_error_n2_with_budget(ch, m, DEFAULT_NODE_BUDGET)
}

pub fn classical_zero_error_n2_with_budget(ch: &ChannelWithState, m: usize, budget: u64) -> Result<ZeroErrorVerdict> {
    check_messages(m)?;
    if m == 1 {
        return Ok(single_message(ch, 2));
    }
    let (ns, ny) = (ch.s_card(), ch.y_card());
    let per_state: Vec<Vec<(usize, BitSet)>> = (0..ns).map(|s| distinct_inputs(ch, s)).collect();
    let radix: Vec<usize> = per_state.iter().map(Vec::len).collect();
    let tuples = radix
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .ok_or(Error::TooLarge {
            what: "first-use encoder count",
            size: u128::MAX,
            limit: u128::from(budget),
        })?;
    let decode = |mut t: usize| -> Vec<usize> {
        let mut idx = vec![0; ns];
        for (s, &r) in radix.iter().enumerate().rev() {
            idx[s] = t % r;
            t /= r;
        }
        idx
    };
    let product = |a: &BitSet, b: &BitSet| {
        BitSet::from_indices(ny * ny, a.iter().flat_map(|y1| b.iter().map(move |y2| y1 * ny + y2)))
    };

    let mut nodes = 0u64;
    let mut first = vec![0usize; m];
    'outer: loop {
        nodes += 1;
        if nodes > budget {
            return Err(Error::SearchBudget(budget));
        }
        let phi1: Vec<Vec<usize>> = first.iter().map(|&t| decode(t)).collect();
        let first_reach: Vec<Vec<&BitSet>> = phi1
            .iter()
            .map(|idx| idx.iter().enumerate().map(|(s, &i)| &per_state[s][i].1).collect())
            .collect();
        let mut second = vec![vec![0usize; ns * ns]; m];
        let mut solved = true;
        for group in overlap_groups(&first_reach) {
            let mut vars = Vec::with_capacity(group.len() * ns);
            let mut slots = Vec::with_capacity(group.len() * ns);
            for (s2, reach2) in per_state.iter().enumerate() {
                for &(w, s1) in &group {
                    vars.push(Var {
                        message: w,
                        cands: reach2
                            .iter()
                            .map(|(x2, r2)| (*x2, product(first_reach[w][s1], r2)))
                            .collect(),
                    });
                    slots.push((w, s1 * ns + s2));
                }
            }
            let found = Search {
                vars,
                messages: m,
                out_len: ny * ny,
                symmetric: 0,
                nodes: &mut nodes,
                budget,
            }
            .run()?;
            match found {
                Some(inputs) => {
                    for (&(w, ctx), x) in slots.iter().zip(inputs) {
                        second[w][ctx] = x;
                    }
                }
                None => {
                    solved = false;
                    break;
                }
            }
        }
        if solved {
            let encoders = (0..m)
                .map(|w| {
                    let f: Vec<usize> = (0..ns).map(|s| per_state[s][phi1[w][s]].0).collect();
                    vec![f, second[w].clone()]
                })
                .collect();
            return Ok(ZeroErrorVerdict {
                feasible: true,
                witness: Some(ZeroErrorCode {
                    uses: 2,
                    s_card: ns,
                    encoders,
                }),
                nodes_explored: nodes,
            });
        }
        // next nondecreasing m-tuple over 0..tuples
        let Some(pos) = (0..m).rev().find(|&i| first[i] + 1 < tuples) else {
            break 'outer;
        };
        first[pos] += 1;
        for i in pos + 1..m {
            first[i] = first[pos];
        }
    }
    Ok(ZeroErrorVerdict {
        feasible: false,
        witness: None,
        nodes_explored: nodes,
    })
}

/// `a` bases on one side and `b` on the other, each a complete orthogonal
/// basis of integer vectors in dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BksSet {
    dim: usize,
    a_bases: Vec<Vec<Vec<i64>>>,
    b_bases: Vec<Vec<Vec<i64>>>,
}

pub fn dot(u: &[i64], v: &[i64]) -> i64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl BksSet {
    pub fn new(dim: usize, a_bases: Vec<Vec<Vec<i64>>>, b_bases: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        if dim == 0 || a_bases.is_empty() || b_bases.is_empty() {
            return Err(Error::BksSet(
                "need a positive dimension and at least one basis per side".into(),
            ));
        }
        for (side, bases) in [("A", &a_bases), ("B", &b_bases)] {
            for (i, basis) in bases.iter().enumerate() {
                if basis.len() != dim {
                    return Err(Error::BksSet(format!(
                        "basis {side}{} has {} vectors, expected {dim}",
                        i + 1,
                        basis.len()
                    )));
                }
                for (k, v) in basis.iter().enumerate() {
                    if v.len() != dim {
                        return Err(Error::BksSet(format!("vector {k} of {side}{} has wrong length", i + 1)));
                    }
                    if v.iter().all(|&c| c == 0) {
                        return Err(Error::BksSet(format!("vector {k} of {side}{} is zero", i + 1)));
                    }
                    for (l, u) in basis.iter().enumerate().skip(k + 1) {
                        if dot(u, v) != 0 {
                            return Err(Error::BksSet(format!(
                                "vectors {k} and {l} of {side}{} are not orthogonal",
                                i + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(BksSet { dim, a_bases, b_bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a_bases(&self) -> &[Vec<Vec<i64>>] {
        &self.a_bases
    }

    pub fn b_bases(&self) -> &[Vec<Vec<i64>>] {
        &self.b_bases
    }

    /// All vectors in input order: `A_1..A_a` then `B_1..B_b`.
    pub fn vectors(&self) -> Vec<Vec<i64>> {
        self.a_bases
            .iter()
            .chain(&self.b_bases)
            .flat_map(|b| b.iter().cloned())
            .collect()
    }
}

/// The 4-dimensional set built from the Mermin–Peres magic square.
pub fn magic_square_bks() -> BksSet {
    let a = vec![
        vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]],
        vec![
            vec![1, 1, 1, 1],
            vec![1, -1, 1, -1],
            vec![1, 1, -1, -1],
            vec![1, -1, -1, 1],
        ],
        vec![
            vec![1, 1, 1, -1],
            vec![1, 1, -1, 1],
            vec![1, -1, 1, 1],
            vec![-1, 1, 1, 1],
        ],
    ];
    let b = vec![
        vec![vec![1, 1, 0, 0], vec![1, -1, 0, 0], vec![0, 0, 1, 1], vec![0, 0, 1, -1]],
        vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 0, -1, 0], vec![0, 1, 0, -1]],
        vec![vec![1, 0, 0, 1], vec![1, 0, 0, -1], vec![0, 1, 1, 0], vec![0, 1, -1, 0]],
    ];
    BksSet::new(4, a, b).expect("magic-square bases are orthogonal")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BksVerdict {
    pub holds: bool,
    /// Vector index within each basis, `A_1..A_a` then `B_1..B_b`, of the
    /// first selection with no orthogonal cross pair.
    pub counterexample: Option<Vec<usize>>,
    pub selections_checked: u64,
}

/// Checks that every choice of one vector per basis contains some `u_i`
/// from the A side orthogonal to some `v_j` from the B side.
pub fn verify_bks(set: &BksSet) -> Result<BksVerdict> {
    let (d, a, b) = (set.dim, set.a_bases.len(), set.b_bases.len());
    let total = (d as u128).checked_pow((a + b) as u32).unwrap_or(u128::MAX);
    if total > MAX_BKS_SELECTIONS {
        return Err(Error::TooLarge {
            what: "B-KS selection count",
            size: total,
            limit: MAX_BKS_SELECTIONS,
        });
    }
    // orth[i][j][k][l]: A_i[k] ⟂ B_j[l]
    let orth: Vec<Vec<Vec<Vec<bool>>>> = set
        .a_bases
        .iter()
        .map(|ai| {
            set.b_bases
                .iter()
                .map(|bj| ai.iter().map(|u| bj.iter().map(|v| dot(u, v) == 0).collect()).collect())
                .collect()
        })
        .collect();
    let mut sel = vec![0usize; a + b];
    let mut checked = 0u64;
    loop {
        checked += 1;
        let covered = (0..a).any(|i| (0..b).any(|j| orth[i][j][sel[i]][sel[a + j]]));
        if !covered {
            return Ok(BksVerdict {
                holds: false,
                counterexample: Some(sel),
                selections_checked: checked,
            });
        }
        let Some(pos) = (0..a + b).rev().find(|&p| sel[p] + 1 < d) else {
            break;
        };
        sel[pos] += 1;
        for s in &mut sel[pos + 1..] {
            *s = 0;
        }
    }
    Ok(BksVerdict {
        holds: true,
        counterexample: None,
        selections_checked: checked,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BksInput {
    pub side: Side,
    /// 0-based basis index on its side.
    pub basis: usize,
    /// 0-based vector index within the basis.
    pub vector: usize,
}

/// Channel whose inputs are the vectors of a B-KS set and whose outputs are
/// the unordered orthogonal pairs. The state `(i, j)` restricts the input
/// to `A_i ∪ B_j`.
#[derive(Clone, Debug)]
pub struct BksChannel {
    set: BksSet,
    vectors: Vec<Vec<i64>>,
    outputs: Vec<(usize, usize)>,
    constraints: InputConstraintMap,
    channel: ChannelWithState,
}

impl BksChannel {
    pub fn set(&self) -> &BksSet {
        &self.set
    }

    pub fn channel(&self) -> &ChannelWithState {
        &self.channel
    }

    pub fn constraints(&self) -> &InputConstraintMap {
        &self.constraints
    }

    /// Output `y` as its pair of inputs `(x, x')`, `x < x'`.
    pub fn output_pair(&self, y: usize) -> (usize, usize) {
        self.outputs[y]
    }

    pub fn outputs(&self) -> &[(usize, usize)] {
        &self.outputs
    }

    pub fn vector(&self, x: usize) -> &[i64] {
        &self.vectors[x]
    }

    pub fn input_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn input_label(&self, x: usize) -> BksInput {
        let d = self.set.dim;
        let a = self.set.a_bases.len();
        if x < a * d {
            BksInput {
                side: Side::A,
                basis: x / d,
                vector: x % d,
            }
        } else {
            BksInput {
                side: Side::B,
                basis: (x - a * d) / d,
                vector: x % d,
            }
        }
    }

    pub fn input_index(&self, label: BksInput) -> usize {
        let d = self.set.dim;
        let offset = match label.side {
            Side::A => 0,
            Side::B => self.set.a_bases.len() * d,
        };
        offset + label.basis * d + label.vector
    }

    /// State index of `(i, j)`, both 0-based.
    pub fn state_index(&self, i: usize, j: usize) -> usize {
        i * self.set.b_bases.len() + j
    }

    pub fn state_pair(&self, s: usize) -> (usize, usize) {
        let b = self.set.b_bases.len();
        (s / b, s % b)
    }
}

/// Builds the activation channel. Each input emits one of the orthogonal
/// pairs containing it, uniformly; a disallowed input behaves like the
/// first vector of `A_i`. `state_dist` defaults to uniform over `[a]×[b]`.
pub fn bks_channel(set: &BksSet, state_dist: Option<Vec<f64>>) -> Result<BksChannel> {
    let verdict = verify_bks(set)?;
    if !verdict.holds {
        return Err(Error::BksSet(format!(
            "covering property fails at selection {:?}",
            verdict.counterexample
        )));
    }
    let (d, a, b) = (set.dim, set.a_bases.len(), set.b_bases.len());
    let vectors = set.vectors();
    let nx = vectors.len();
    let mut outputs = Vec::new();
    for x in 0..nx {
        for x2 in x + 1..nx {
            if dot(&vectors[x], &vectors[x2]) == 0 {
                outputs.push((x, x2));
            }
        }
    }
    let degree: Vec<usize> = (0..nx)
        .map(|x| outputs.iter().filter(|&&(u, v)| u == x || v == x).count())
        .collect();
    let base: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            outputs
                .iter()
                .map(|&(u, v)| if u == x || v == x { 1.0 / degree[x] as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut allowed = Vec::with_capacity(a * b);
    let mut reference = Vec::with_capacity(a * b);
    for i in 0..a {
        for j in 0..b {
            let mut set_ij: Vec<usize> = (i * d..(i + 1) * d).collect();
            set_ij.extend((a + j) * d..(a + j + 1) * d);
            allowed.push(set_ij);
            reference.push(i * d);
        }
    }
    let constraints = InputConstraintMap::new(allowed, reference)?;
    let dist = state_dist.unwrap_or_else(|| uniform(a * b));
    let channel = constrained_channel(&base, &constraints, dist)?
        .with_metadata("construction", "bks")
        .with_metadata("output_rule", "uniform-over-incident-orthogonal-pairs")
        .with_metadata("disallowed_input", "first-vector-of-A_i");
    Ok(BksChannel {
        set: set.clone(),
        vectors,
        outputs,
        constraints,
        channel,
    })
}

/// One leaf of the entanglement-assisted protocol tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolBranch {
    /// 0-based `(i, j)`.
    pub state: (usize, usize),
    /// 1 or 2.
    pub message: u8,
    pub input: usize,
    pub p_input: f64,
    pub output: usize,
    pub output_pair: (usize, usize),
    pub p_output: f64,
    /// Probabilities of the receiver PVM outcomes: first vector of the pair,
    /// second vector, remainder.
    pub receiver_probs: [f64; 3],
    pub p_decoded_correctly: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolTranscript {
    pub branches: Vec<ProtocolBranch>,
    pub success_probability: f64,
    pub max_remainder_probability: f64,
    /// Largest `|1 - sum of branch weights|` over (state, message).
    pub max_branch_sum_error: f64,
}

fn normalized(v: &[i64]) -> ComplexVector {
    ComplexVector::from_real(&v.iter().map(|&c| c as f64).collect::<Vec<_>>()).normalized()
}

/// Runs the protocol on every branch: shared `d`-dimensional maximally
/// entangled state; for message 1 the transmitter measures in `A_i`, for
/// message 2 in `B_j`, and sends the outcome as the input. The receiver
/// measures `{|x*><x*|, |x'*><x'*|, rest}` for the received pair and
/// decodes the side of the vector it finds.
pub fn ea_zero_error_protocol(bch: &BksChannel) -> Result<ProtocolTranscript> {
    let d = bch.set.dim;
    let ch = &bch.channel;
    let phi = max_entangled(d)?;
    let mut branches = Vec::new();
    let mut success = 0.0;
    let mut max_rest: f64 = 0.0;
    let mut max_sum_err: f64 = 0.0;
    for s in 0..ch.s_card() {
        let (i, j) = bch.state_pair(s);
        for message in [1u8, 2] {
            let (side, basis_idx, basis) = if message == 1 {
                (Side::A, i, &bch.set.a_bases[i])
            } else {
                (Side::B, j, &bch.set.b_bases[j])
            };
            let vecs: Vec<ComplexVector> = basis.iter().map(|v| normalized(v)).collect();
            let outcomes = phi.measure(&Povm::from_basis(&vecs)?, 0)?;
            let mut branch_sum = 0.0;
            for (k, out) in outcomes.into_iter().enumerate() {
                let Some(post) = out.post_state else { continue };
                let x = bch.input_index(BksInput {
                    side,
                    basis: basis_idx,
                    vector: k,
                });
                let rx = post.reduced(&[1])?;
                for y in 0..ch.y_card() {
                    let py = ch.prob(s, x, y);
                    if py == 0.0 {
                        continue;
                    }
                    let (u, v) = bch.outputs[y];
                    let pu = normalized(&bch.vectors[u]).conj();
                    let pv = normalized(&bch.vectors[v]).conj();
                    let eu = pu.outer(&pu);
                    let ev = pv.outer(&pv);
                    let rest = &(&ComplexMatrix::identity(d) - &eu) - &ev;
                    let pvm = Povm::projective(vec![eu, ev, rest])?;
                    let probs = rx.outcome_probabilities(&pvm, 0)?;
                    let decode = |z: usize| match bch.input_label(z).side {
                        Side::A => 1u8,
                        Side::B => 2u8,
                    };
                    let correct = f64::from(u8::from(decode(u) == message)) * probs[0]
                        + f64::from(u8::from(decode(v) == message)) * probs[1];
                    let weight = out.probability * py;
                    branch_sum += weight;
                    success += ch.state_dist()[s] * 0.5 * weight * correct;
                    max_rest = max_rest.max(probs[2].abs());
                    branches.push(ProtocolBranch {
                        state: (i, j),
                        message,
                        input: x,
                        p_input: out.probability,
                        output: y,
                        output_pair: (u, v),
                        p_output: py,
                        receiver_probs: [probs[0], probs[1], probs[2]],
                        p_decoded_correctly: correct,
                    });
                }
            }
            max_sum_err = max_sum_err.max((branch_sum - 1.0).abs());
        }
    }
    Ok(ProtocolTranscript {
        branches,
        success_probability: success,
        max_remainder_probability: max_rest,
        max_branch_sum_error: max_sum_err,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueCertificate {
    pub holds: bool,
    pub clique_sizes: (usize, usize),
}

/// Checks that, in state `(i, j)`, `A_i` and `B_j` are each cliques of the
/// confusability graph (inputs sharing a possible output), so the allowed
/// inputs are covered by two cliques.
pub fn two_clique_certificate(bch: &BksChannel, i: usize, j: usize) -> Result<CliqueCertificate> {
    let (a, b) = (bch.set.a_bases.len(), bch.set.b_bases.len());
    if i >= a || j >= b {
        return Err(Error::Argument(format!("state ({i},{j}) outside [{a}]×[{b}]")));
    }
    let s = bch.state_index(i, j);
    let d = bch.set.dim;
    let ch = &bch.channel;
    let clique = |members: Vec<usize>| {
        let ok = members.iter().enumerate().all(|(n, &x)| {
            members[n + 1..].iter().all(|&x2| {
                ch.support(s, x).intersects(&ch.support(s, x2)) && dot(&bch.vectors[x], &bch.vectors[x2]) == 0
            })
        });
        if ok {
            members.len()
        } else {
            0
        }
    };
    let sa = clique((i * d..(i + 1) * d).collect());
    let sb = clique(((a + j) * d..(a + j + 1) * d).collect());
    Ok(CliqueCertificate {
        holds: sa == d && sb == d,
        clique_sizes: (sa, sb),
    })
}
