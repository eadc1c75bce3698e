//! Classical capacity with causal state information at the transmitter.
//!
//! With the state known causally, the capacity of `(N, P_S)` equals the
//! ordinary capacity of the stateless channel whose inputs are Shannon
//! strategies `t: S -> X`, with `W(y|t) = sum_s P_S(s) N(y|t(s),s)`.
//! [`shannon_strategy_channel`] builds `W`; [`blahut_arimoto`] computes its
//! capacity with a certified duality gap.
//!
//! For the noisy complete-graph channels the capacity has a closed form,
//! [`closed_form_km`], and [`lemma2_min_bruteforce`] re-derives the minimum
//! conditional entropy behind it by enumerating every strategy.

use std::collections::HashMap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{complete_graph, ChannelWithState};
use crate::info::{entropy, one_plus_x_ln_one_plus_x_minus_x};
use crate::{Error, Result};

/// Largest strategy alphabet `|X|^|S|` we are willing to materialise.
pub const MAX_STRATEGIES: u128 = 1 << 26;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// The stateless channel over Shannon strategies.
///
/// Strategy index `t` encodes the map `s -> x` in base `|X|`, least
/// significant digit first: `t = sum_s x(s) |X|^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyChannel {
    x_card: usize,
    s_card: usize,
    y_card: usize,
    strategy_count: usize,
    kernel: Vec<f64>,
}

impl StrategyChannel {
    pub fn strategy_count(&self) -> usize {
        self.strategy_count
    }

    pub fn y_card(&self) -> usize {
        self.y_card
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.kernel[t * self.y_card..(t + 1) * self.y_card]
    }

    pub fn decode(&self, mut t: usize) -> Vec<usize> {
        assert!(t < self.strategy_count);
        (0..self.s_card)
            .map(|_| {
                let x = t % self.x_card;
                t /= self.x_card;
                x
            })
            .collect()
    }

    pub fn encode(&self, strategy: &[usize]) -> usize {
        assert_eq!(strategy.len(), self.s_card);
        strategy.iter().rev().fold(0, |acc, &x| {
            assert!(x < self.x_card);
            acc * self.x_card + x
        })
    }

    /// `I(T;Y)` in bits for an input distribution over strategies.
    pub fn mutual_information(&self, input: &[f64]) -> f64 {
        assert_eq!(input.len(), self.strategy_count);
        let rows: Vec<&[f64]> = (0..self.strategy_count).map(|t| self.row(t)).collect();
        let q = output_dist(&rows, input, self.y_card);
        rows.iter()
            .zip(input)
            .filter(|(_, &r)| r > 0.0)
            .map(|(row, &r)| r * divergence_to(row, &q))
            .sum()
    }
}

pub fn shannon_strategy_channel(ch: &ChannelWithState) -> Result<StrategyChannel> {
    let (x_card, s_card, y_card) = (ch.x_card(), ch.s_card(), ch.y_card());
    let count = (x_card as u128)
        .checked_pow(s_card as u32)
        .filter(|&c| c <= MAX_STRATEGIES)
        .ok_or(Error::TooLarge {
            what: "strategy count |X|^|S|",
            size: (x_card as f64).powi(s_card as i32).min(u128::MAX as f64) as u128,
            limit: MAX_STRATEGIES,
        })? as usize;
    let mut kernel = vec![0.0; count * y_card];
    kernel.par_chunks_mut(y_card).enumerate().for_each(|(t, row)| {
        let mut code = t;
        for (s, &ps) in ch.state_dist().iter().enumerate() {
            let x = code % x_card;
            code /= x_card;
            for (w, &n) in row.iter_mut().zip(ch.row(s, x)) {
                *w += ps * n;
            }
        }
    });
    Ok(StrategyChannel {
        x_card,
        s_card,
        y_card,
        strategy_count: count,
        kernel,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Mutual information achieved by `input_dist`; a lower bound on capacity.
    pub capacity_bits: f64,
    pub input_dist: Vec<f64>,
    pub iterations: usize,
    /// Capacity lies in `[capacity_bits, capacity_bits + gap_bound]`.
    pub gap_bound: f64,
}

impl CapacityReport {
    pub fn upper_bound(&self) -> f64 {
        self.capacity_bits + self.gap_bound
    }
}

fn output_dist(rows: &[&[f64]], input: &[f64], y_card: usize) -> Vec<f64> {
    let mut q = vec![0.0; y_card];
    for (row, &r) in rows.iter().zip(input) {
        if r > 0.0 {
            for (qy, &w) in q.iter_mut().zip(row.iter()) {
                *qy += r * w;
            }
        }
    }
    q
}

/// `D(W(·|x) || q)` in bits.
fn divergence_to(row: &[f64], q: &[f64]) -> f64 {
    row.iter()
        .zip(q)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &qy)| w * (w / qy).log2())
        .sum()
}

/// Capacity of a stateless channel given by `rows`, by Blahut–Arimoto.
///
/// Stops once `max_x D(W_x||q) - I(r)` is at most `tol`; that difference
/// bounds the distance of `I(r)` to capacity. `trace` receives `I(r)` after
/// every update.
fn blahut_arimoto_rows(
    rows: &[&[f64]],
    y_card: usize,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    let n = rows.len();
    let mut r = vec![1.0 / n as f64; n];
    let mut d = vec![0.0; n];
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for iter in 0..=max_iter {
        let q = output_dist(rows, &r, y_card);
        for (dx, row) in d.iter_mut().zip(rows) {
            *dx = divergence_to(row, &q);
        }
        let lower: f64 = r.iter().zip(&d).map(|(ri, di)| ri * di).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if let Some(t) = trace.as_deref_mut() {
            t.push(lower);
        }
        best = (best.0.max(lower), best.1.min(upper));
        if upper - lower <= tol {
            return Ok((r, lower, (upper - lower).max(0.0), iter));
        }
        if iter == max_iter {
            break;
        }
        let dmax = upper;
        let mut z = 0.0;
        for (ri, di) in r.iter_mut().zip(&d) {
            *ri *= (di - dmax).exp2();
            z += *ri;
        }
        r.iter_mut().for_each(|ri| *ri /= z);
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        lower: best.0,
        upper: best.1,
        tol,
    })
}

fn blahut_arimoto_impl(
    w: &StrategyChannel,
    tol: f64,
    max_iter: usize,
    trace: Option<&mut Vec<f64>>,
) -> Result<CapacityReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    // Strategies with bit-identical rows are interchangeable; run on one
    // representative each and give the others zero weight.
    let mut first_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut reps = Vec::new();
    for t in 0..w.strategy_count {
        let key: Vec<u64> = w.row(t).iter().map(|v| v.to_bits()).collect();
        first_of.entry(key).or_insert_with(|| {
            reps.push(t);
            reps.len() - 1
        });
    }
    let rows: Vec<&[f64]> = reps.iter().map(|&t| w.row(t)).collect();
    let (r, lower, gap, iterations) = blahut_arimoto_rows(&rows, w.y_card, tol, max_iter, trace)?;
    let mut input_dist = vec![0.0; w.strategy_count];
    for (&t, &rt) in reps.iter().zip(&r) {
        input_dist[t] = rt;
    }
    Ok(CapacityReport {
        capacity_bits: lower.max(0.0),
        input_dist,
        iterations,
        gap_bound: gap,
    })
}

pub fn blahut_arimoto(w: &StrategyChannel, tol: f64, max_iter: usize) -> Result<CapacityReport> {
    blahut_arimoto_impl(w, tol, max_iter, None)
}

/// As [`blahut_arimoto`], also returning the achieved mutual information
/// after each iteration.
pub fn blahut_arimoto_traced(w: &StrategyChannel, tol: f64, max_iter: usize) -> Result<(CapacityReport, Vec<f64>)> {
    let mut trace = Vec::new();
    let report = blahut_arimoto_impl(w, tol, max_iter, Some(&mut trace))?;
    Ok((report, trace))
}

/// Classical capacity with causal state information, default tolerances.
pub fn causal_capacity(ch: &ChannelWithState) -> Result<CapacityReport> {
    blahut_arimoto(&shannon_strategy_channel(ch)?, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

fn check_km(m: usize, p: f64) -> Result<()> {
    if m < 3 {
        return Err(Error::Argument(format!("m must be >= 3, got {m}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NoiseParameter(p));
    }
    Ok(())
}

/// `c_{m,k} = (m - 2k + 1)/(m - 1)` for `k = 1..=m`.
pub fn km_coefficients(m: usize) -> Vec<f64> {
    let mf = m as f64;
    (1..=m).map(|k| (mf - 2.0 * k as f64 + 1.0) / (mf - 1.0)).collect()
}

/// Capacity of the noisy complete-graph channel `(K_m, Unif, p)`:
/// `(1/m) sum_k (1 + p c_{m,k}) log2(1 + p c_{m,k})`.
///
/// The `p c_{m,k}` terms sum to zero exactly (the coefficients come in
/// negated pairs), so each summand is evaluated with its linear part removed.
pub fn closed_form_km(m: usize, p: f64) -> Result<f64> {
    check_km(m, p)?;
    let sum: f64 = km_coefficients(m)
        .into_iter()
        .map(|c| one_plus_x_ln_one_plus_x_minus_x(p * c))
        .sum();
    Ok(sum / (m as f64 * LN_2))
}

/// Right-hand side of the minimum-entropy identity:
/// `log2 m - closed_form_km(m, p)`.
pub fn min_output_entropy_km(m: usize, p: f64) -> Result<f64> {
    Ok((m as f64).log2() - closed_form_km(m, p)?)
}

/// Largest `m` whose `2^{m(m-1)/2}` binary strategies we enumerate.
pub const LEMMA2_MAX_M: usize = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Result {
    pub min_value: f64,
    /// Minimising `phi: S -> {0,1}` over the lexicographic edges of `K_m`.
    pub argmin: Vec<u8>,
    /// `argmin` packed as `sum_s phi(s) 2^s`; the smallest among exact ties.
    pub encoding: u64,
    /// Noiseless output distribution `v^phi` of the minimiser.
    pub v: Vec<f64>,
}

fn phi_counts(edges: &[(usize, usize)], m: usize, code: u64) -> Vec<u32> {
    let mut counts = vec![0u32; m];
    for (s, &(a, b)) in edges.iter().enumerate() {
        let y = if code >> s & 1 == 0 { a } else { b };
        counts[y] += 1;
    }
    counts
}

/// `h_phi = H(p v^phi + (1-p)/m)`, with `v^phi` given by integer edge counts.
///
/// Counts are sorted first so that permutation-equivalent strategies produce
/// bit-identical values.
pub fn h_phi(counts: &[u32], p: f64) -> f64 {
    let m = counts.len();
    let pairs = (m * (m - 1) / 2) as f64;
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let dist: Vec<f64> = sorted
        .iter()
        .map(|&c| p * (f64::from(c) / pairs) + (1.0 - p) / m as f64)
        .collect();
    entropy(&dist).expect("valid distribution")
}

/// Exhaustive `min_phi h_phi` over all `phi: E(K_m) -> {0,1}`.
pub fn lemma2_min_bruteforce(m: usize, p: f64) -> Result<Lemma2Result> {
    check_km(m, p)?;
    if m > LEMMA2_MAX_M {
        return Err(Error::TooLarge {
            what: "lemma-2 enumeration size m",
            size: m as u128,
            limit: LEMMA2_MAX_M as u128,
        });
    }
    let g = complete_graph(m)?;
    let edges = g.edges();
    let total: u64 = 1 << edges.len();
    let (min_value, encoding) = (0..total)
        .into_par_iter()
        .map(|code| (h_phi(&phi_counts(edges, m, code), p), code))
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let counts = phi_counts(edges, m, encoding);
    let pairs = edges.len() as f64;
    Ok(Lemma2Result {
        min_value,
        argmin: (0..edges.len()).map(|s| (encoding >> s & 1) as u8).collect(),
        encoding,
        v: counts.iter().map(|&c| f64::from(c) / pairs).collect(),
    })
}

/// The constructive sequence `phi_1, ..., phi_{m-1}` that pushes probability
/// mass onto successive argmax outputs (smallest label on ties). Each step
/// majorizes the previous one, so `h_phi` never increases along it.
pub fn majorization_descent(m: usize, phi: &[u8]) -> Result<Vec<Vec<u8>>> {
    let g = complete_graph(m)?;
    let edges = g.edges();
    if phi.len() != edges.len() {
        return Err(Error::Shape(format!(
            "phi has {} entries for {} edges",
            phi.len(),
            edges.len()
        )));
    }
    let mut current = phi.to_vec();
    let mut fixed: Vec<usize> = Vec::new();
    let mut sequence = Vec::with_capacity(m - 1);
    for _ in 1..m {
        let code = current
            .iter()
            .enumerate()
            .fold(0u64, |acc, (s, &b)| acc | (u64::from(b) << s));
        let counts = phi_counts(edges, m, code);
        let yi = (0..m)
            .filter(|y| !fixed.contains(y))
            .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .expect("unfixed output remains");
        for (s, &(a, b)) in edges.iter().enumerate() {
            let untouched = !fixed.contains(&a) && !fixed.contains(&b);
            let chosen = if current[s] == 0 { a } else { b };
            if untouched && (a == yi || b == yi) && chosen != yi {
                current[s] ^= 1;
            }
        }
        fixed.push(yi);
        sequence.push(current.clone());
    }
    Ok(sequence)
}

pub fn phi_output_counts(m: usize, phi: &[u8]) -> Result<Vec<u32>> {
    let g = complete_graph(m)?;
    let code = phi
        .iter()
        .enumerate()
        .fold(0u64, |acc, (s, &b)| acc | (u64::from(b) << s));
    Ok(phi_counts(g.edges(), m, code))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cyclic_shift_channel, graph_channel_uniform, noisy_complete_graph_channel};
    use proptest::prelude::*;

    fn bsc(eps: f64) -> ChannelWithState {
        ChannelWithState::stateless(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]).unwrap()
    }

    #[test]
    fn noiseless_bit() {
        let r = causal_capacity(&bsc(0.0)).unwrap();
        assert!((r.capacity_bits - 1.0).abs() < 1e-9);
        assert!(r.gap_bound <= DEFAULT_TOL);
    }

    #[test]
    fn bsc_matches_one_minus_hb() {
        let eps = 0.11;
        let r = causal_capacity(&bsc(eps)).unwrap();
        let expected = 1.0 - crate::info::binary_entropy(eps).unwrap();
        assert!((r.capacity_bits - expected).abs() < 1e-9);
    }

    #[test]
    fn stateless_strategy_channel_is_the_channel() {
        let ch = bsc(0.2);
        let w = shannon_strategy_channel(&ch).unwrap();
        assert_eq!(w.strategy_count(), 2);
        assert_eq!(w.row(0), ch.row(0, 0));
        assert_eq!(w.row(1), ch.row(0, 1));
    }

    #[test]
    fn c5_has_32_strategies_and_capacity_point_eight() {
        let ch = graph_channel_uniform(&crate::channels::cycle_graph(5).unwrap()).unwrap();
        let w = shannon_strategy_channel(&ch).unwrap();
        assert_eq!((w.strategy_count(), w.y_card()), (32, 5));
        let r = blahut_arimoto(&w, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((r.capacity_bits - 0.8).abs() < 1e-6, "{}", r.capacity_bits);
    }

    #[test]
    fn k4_all_zero_strategy_counts_smaller_endpoints() {
        let ch = graph_channel_uniform(&complete_graph(4).unwrap()).unwrap();
        let w = shannon_strategy_channel(&ch).unwrap();
        let t0 = w.encode(&[0; 6]);
        assert_eq!(t0, 0);
        let expect = [3.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0, 0.0];
        for (a, b) in w.row(t0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn strategy_codec_round_trips() {
        let ch = graph_channel_uniform(&complete_graph(4).unwrap()).unwrap();
        let w = shannon_strategy_channel(&ch).unwrap();
        for t in 0..w.strategy_count() {
            assert_eq!(w.encode(&w.decode(t)), t);
        }
    }

    #[test]
    fn strategy_count_guard() {
        let ch = ChannelWithState::new(vec![vec![vec![1.0]; 8]; 9], crate::channels::uniform(9)).unwrap();
        assert!(matches!(shannon_strategy_channel(&ch), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn shift_strategy_achieves_point_eight() {
        // x(u,s) = u xor (s mod 2) with U uniform on {0,1}.
        let ch = cyclic_shift_channel(5).unwrap();
        let w = shannon_strategy_channel(&ch).unwrap();
        let t: Vec<usize> = (0..5).map(|s| s % 2).collect();
        let t_bar: Vec<usize> = t.iter().map(|x| 1 - x).collect();
        let mut input = vec![0.0; w.strategy_count()];
        input[w.encode(&t)] = 0.5;
        input[w.encode(&t_bar)] = 0.5;
        assert!((w.mutual_information(&input) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn closed_form_endpoints() {
        assert_eq!(closed_form_km(4, 0.0).unwrap(), 0.0);
        let v = closed_form_km(4, 0.1).unwrap();
        assert!(v <= 4.02e-3 && v > 4.0e-3, "{v}");
        assert!(closed_form_km(2, 0.5).is_err());
        assert!(closed_form_km(4, 1.5).is_err());
    }

    #[test]
    fn closed_form_at_p1_matches_enumeration() {
        // Oracle: exhaustive minimum entropy over all 64 strategies of K_4.
        let oracle = 2.0 - lemma2_min_bruteforce(4, 1.0).unwrap().min_value;
        // Frozen from the oracle: (1/4)[2 + (4/3)log2(4/3) + (2/3)log2(2/3)].
        let frozen = 0.540_852_082_972_755_2;
        assert!((oracle - frozen).abs() < 1e-14, "{oracle}");
        assert!((closed_form_km(4, 1.0).unwrap() - frozen).abs() < 1e-14);
    }

    #[test]
    fn brute_force_min_small_cases() {
        let r = lemma2_min_bruteforce(3, 1.0).unwrap();
        let mut v = r.v.clone();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((v[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((v[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v[2], 0.0);
        for m in 3..=6 {
            let r = lemma2_min_bruteforce(m, 0.0).unwrap();
            assert!((r.min_value - (m as f64).log2()).abs() < 1e-12);
            assert_eq!(r.encoding, 0);
        }
        assert!(lemma2_min_bruteforce(8, 0.5).is_err());
    }

    #[test]
    fn brute_force_min_matches_closed_form() {
        for m in 3..=6 {
            for &p in &[0.0, 0.1, 0.5, 1.0] {
                let brute = lemma2_min_bruteforce(m, p).unwrap().min_value;
                let closed = min_output_entropy_km(m, p).unwrap();
                assert!((brute - closed).abs() < 1e-12, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn brute_force_argmin_is_the_staircase() {
        for m in 3..=6 {
            let r = lemma2_min_bruteforce(m, 0.7).unwrap();
            let mut counts: Vec<u32> =
                r.v.iter()
                    .map(|v| (v * (m * (m - 1) / 2) as f64).round() as u32)
                    .collect();
            counts.sort_unstable_by(|a, b| b.cmp(a));
            let stair: Vec<u32> = (0..m as u32).rev().collect();
            assert_eq!(counts, stair, "m={m}");
        }
    }

    #[test]
    fn blahut_arimoto_matches_closed_form_small_grid() {
        for m in 3..=4 {
            for &p in &[0.3, 1.0] {
                let ch = noisy_complete_graph_channel(m, p).unwrap();
                let r = causal_capacity(&ch).unwrap();
                let c = closed_form_km(m, p).unwrap();
                assert!((r.capacity_bits - c).abs() < 1e-6, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn lower_bound_is_monotone() {
        let ch = noisy_complete_graph_channel(4, 0.5).unwrap();
        let w = shannon_strategy_channel(&ch).unwrap();
        let (_, trace) = blahut_arimoto_traced(&w, 1e-10, DEFAULT_MAX_ITER).unwrap();
        assert!(trace.len() > 2);
        for pair in trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-15, "{pair:?}");
        }
    }

    #[test]
    fn non_convergence_reports_bounds() {
        let ch = noisy_complete_graph_channel(4, 0.5).unwrap();
        let w = shannon_strategy_channel(&ch).unwrap();
        match blahut_arimoto(&w, 1e-14, 2) {
            Err(Error::NotConverged { lower, upper, .. }) => assert!(lower <= upper),
            other => panic!("{other:?}"),
        }
        assert!(blahut_arimoto(&w, 0.0, 10).is_err());
    }

    #[test]
    fn majorization_descent_reaches_the_staircase() {
        let m = 5;
        let edges = m * (m - 1) / 2;
        for code in [0u64, 0b1010101010, 0b1111100000, 0b0110011001] {
            let phi: Vec<u8> = (0..edges).map(|s| (code >> s & 1) as u8).collect();
            let seq = majorization_descent(m, &phi).unwrap();
            let mut prev = h_phi(&phi_output_counts(m, &phi).unwrap(), 0.6);
            for step in &seq {
                let h = h_phi(&phi_output_counts(m, step).unwrap(), 0.6);
                assert!(h <= prev + 1e-12);
                prev = h;
            }
            let mut last = phi_output_counts(m, seq.last().unwrap()).unwrap();
            last.sort_unstable_by(|a, b| b.cmp(a));
            assert_eq!(last, vec![4, 3, 2, 1, 0]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn capacity_invariant_under_output_relabeling(seed in 0u64..1000) {
            let ch = noisy_complete_graph_channel(4, 0.6).unwrap();
            let mut perm: Vec<usize> = (0..4).collect();
            let mut state = seed;
            for i in (1..4).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let relabeled = ch.relabel_outputs(&perm).unwrap();
            let a = causal_capacity(&ch).unwrap().capacity_bits;
            let b = causal_capacity(&relabeled).unwrap().capacity_bits;
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}
