//! Bell-pair channel conversion.
//!
//! Per channel use the transmitter rotates its half of `|Phi>` by
//! `R(-xi_s)`, measures in the `±` basis to get `U`, and sends
//! `X = X' xor U`. The receiver rotates by `R(eta_y)` and measures in the
//! `±` basis to get `Y'`. The result is a stateless binary channel
//! `X' -> Y'`, which is always symmetric because `U` is uniform and
//! independent of the state.
//!
//! All functions take the *noiseless* graph channel (binary input,
//! deterministic kernel) together with the noise level `p`; the uniform-noise
//! branch of the noisy version is handled inside.

use std::f64::consts::{PI, TAU};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::closed_form_km;
use crate::channels::{complete_graph, GraphSpec};
use crate::info::bsc_capacity_from_bias;
use crate::quantum::{bell_pair, phase_gate, plus_minus_measurement};
use crate::{ChannelWithState, Error, Result};

const ANGLE_TOL: f64 = 1e-12;

/// Seed used by the CLI when none is given.
pub const DEFAULT_MC_SEED: u64 = 0xC5C5;

/// Reduces an angle into `[0, 2pi)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The angle perpendicular to the angular midpoint of `a` and `b`:
/// `(a+b+pi)/2` if `a > b`, `(a+b-pi)/2` if `a < b`, reduced mod `2pi`.
pub fn arrow(a: f64, b: f64) -> Result<f64> {
    let (a, b) = (reduce_angle(a), reduce_angle(b));
    if (a - b).abs() <= ANGLE_TOL {
        return Err(Error::CoincidingAngles(a));
    }
    let shift = if a > b { PI } else { -PI };
    Ok(reduce_angle((a + b + shift) / 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleScheme {
    xi: Vec<f64>,
    eta: Vec<f64>,
}

impl AngleScheme {
    /// `xi` is indexed by state, `eta` by channel output. Angles are reduced
    /// into `[0, 2pi)`.
    pub fn new(xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = xi.iter().chain(&eta).find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite angle {bad}")));
        }
        Ok(AngleScheme {
            xi: xi.into_iter().map(reduce_angle).collect(),
            eta: eta.into_iter().map(reduce_angle).collect(),
        })
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Adds `theta` to every angle.
    pub fn rotated(&self, theta: f64) -> Self {
        AngleScheme {
            xi: self.xi.iter().map(|v| reduce_angle(v + theta)).collect(),
            eta: self.eta.iter().map(|v| reduce_angle(v + theta)).collect(),
        }
    }
}

/// Angles for the 5-cycle written as `Y = X + S mod 5`
/// (see [`crate::channels::cyclic_shift_channel`]).
pub fn c5_angles() -> AngleScheme {
    let scale = |k: &[f64]| k.iter().map(|v| v * PI / 10.0).collect::<Vec<_>>();
    AngleScheme::new(scale(&[0.0, 8.0, 16.0, 4.0, 12.0]), scale(&[1.0, 9.0, 17.0, 5.0, 13.0])).expect("finite angles")
}

/// Outputs spread evenly on the circle, `eta_y = 2 pi y / m`, and each state
/// `(s0, s1)` gets `xi = arrow(eta_s0, eta_s1)`. `edges` lists the endpoint
/// pairs in state order; orientation matters.
pub fn arrow_angles(m: usize, edges: &[(usize, usize)]) -> Result<AngleScheme> {
    if m < 2 {
        return Err(Error::Argument(format!("need at least two outputs, got {m}")));
    }
    let eta: Vec<f64> = (0..m).map(|y| TAU * y as f64 / m as f64).collect();
    let xi = edges
        .iter()
        .map(|&(a, b)| {
            if a >= m || b >= m {
                return Err(Error::Argument(format!("edge ({a},{b}) outside {m} outputs")));
            }
            arrow(eta[a], eta[b])
        })
        .collect::<Result<Vec<_>>>()?;
    AngleScheme::new(xi, eta)
}

/// [`arrow_angles`] for the complete graph, states in lexicographic edge order.
pub fn km_angles(m: usize) -> Result<AngleScheme> {
    let g = complete_graph(m)?;
    arrow_angles(m, g.edges())
}

/// [`arrow_angles`] using the edges of an arbitrary graph.
pub fn graph_arrow_angles(g: &GraphSpec) -> Result<AngleScheme> {
    arrow_angles(g.vertex_count(), g.edges())
}

/// The converted channel. Agreement probabilities are conditioned on the
/// physical input `X`; `crossover` is `Pr(Y' != X')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InducedBsc {
    pub p_agree_given_x0: f64,
    pub p_agree_given_x1: f64,
    pub crossover: f64,
}

impl InducedBsc {
    fn from_agreements(a0: f64, a1: f64) -> Self {
        InducedBsc {
            p_agree_given_x0: a0,
            p_agree_given_x1: a1,
            crossover: 1.0 - (a0 + a1) / 2.0,
        }
    }

    /// `Pr(Y' = X')`.
    pub fn agree(&self) -> f64 {
        (self.p_agree_given_x0 + self.p_agree_given_x1) / 2.0
    }

    /// `1 - H_b(crossover)`.
    pub fn rate(&self) -> f64 {
        bsc_capacity_from_bias(self.agree() - 0.5)
    }

    pub fn max_abs_diff(&self, other: &InducedBsc) -> f64 {
        [
            self.p_agree_given_x0 - other.p_agree_given_x0,
            self.p_agree_given_x1 - other.p_agree_given_x1,
            self.crossover - other.crossover,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// `(s0, s1)` per state: the outputs for inputs 0 and 1.
pub fn graph_endpoints(ch: &ChannelWithState) -> Result<Vec<(usize, usize)>> {
    if ch.x_card() != 2 {
        return Err(Error::NotGraphChannel(format!(
            "input alphabet has {} symbols, expected 2",
            ch.x_card()
        )));
    }
    let out = ch
        .deterministic_outputs()
        .ok_or_else(|| Error::NotGraphChannel("kernel is not deterministic".into()))?;
    Ok(out.into_iter().map(|o| (o[0], o[1])).collect())
}

fn check_inputs(ch: &ChannelWithState, p: f64, ang: &AngleScheme) -> Result<Vec<(usize, usize)>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NoiseParameter(p));
    }
    let ends = graph_endpoints(ch)?;
    if ang.xi.len() != ch.s_card() || ang.eta.len() != ch.y_card() {
        return Err(Error::Shape(format!(
            "angle scheme has {} state and {} output angles, channel has {} states and {} outputs",
            ang.xi.len(),
            ang.eta.len(),
            ch.s_card(),
            ch.y_card()
        )));
    }
    Ok(ends)
}

fn cos2_half(d: f64) -> f64 {
    (d / 2.0).cos().powi(2)
}

/// Closed-form agreement probabilities.
///
/// Under the uniform-noise branch the receiver sees a uniform `Y`, so the
/// per-state agreement is the average of `cos^2((eta_y - xi_s)/2)` over `y`;
/// that average is exactly 1/2 whenever the `eta` are evenly spread.
pub fn induced_bsc_analytic(ch: &ChannelWithState, p: f64, ang: &AngleScheme) -> Result<InducedBsc> {
    let ends = check_inputs(ch, p, ang)?;
    let ny = ch.y_card() as f64;
    let (mut a0, mut a1) = (0.0, 0.0);
    for (s, (&ps, &(s0, s1))) in ch.state_dist().iter().zip(&ends).enumerate() {
        let xi = ang.xi[s];
        let noise_agree: f64 = ang.eta.iter().map(|&e| cos2_half(e - xi)).sum::<f64>() / ny;
        a0 += ps * (p * cos2_half(ang.eta[s0] - xi) + (1.0 - p) * noise_agree);
        a1 += ps * (p * (1.0 - cos2_half(ang.eta[s1] - xi)) + (1.0 - p) * (1.0 - noise_agree));
    }
    Ok(InducedBsc::from_agreements(a0, a1))
}

/// Exact joint law of the protocol obtained by running it through the
/// quantum simulator, with `X'` uniform.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulatedConversion {
    pub bsc: InducedBsc,
    /// `Pr(X = 0 | S = s)`.
    pub p_x0_given_s: Vec<f64>,
}

pub fn simulate_conversion(ch: &ChannelWithState, p: f64, ang: &AngleScheme) -> Result<SimulatedConversion> {
    let ends = check_inputs(ch, p, ang)?;
    let pm = plus_minus_measurement();
    let ny = ch.y_card();
    let mut joint_agree = [0.0f64; 2];
    let mut px = [0.0f64; 2];
    let mut p_x0_given_s = Vec::with_capacity(ch.s_card());
    for (s, (&ps, &(s0, s1))) in ch.state_dist().iter().zip(&ends).enumerate() {
        let rotated = bell_pair().apply_local(&phase_gate(-ang.xi[s]), 0)?;
        let mut x0 = 0.0;
        for (u, out) in rotated.measure(&pm, 0)?.into_iter().enumerate() {
            let Some(post) = out.post_state else { continue };
            for x_prime in 0..2usize {
                let w = ps * 0.5 * out.probability;
                let x = x_prime ^ u;
                if x == 0 {
                    x0 += 0.5 * out.probability;
                }
                px[x] += w;
                let target = if x == 0 { s0 } else { s1 };
                for y in 0..ny {
                    let py = p * f64::from(u8::from(y == target)) + (1.0 - p) / ny as f64;
                    if py == 0.0 {
                        continue;
                    }
                    let at_rx = post.apply_local(&phase_gate(ang.eta[y]), 1)?;
                    let agree = at_rx.measure(&pm, 1)?[x_prime].probability;
                    joint_agree[x] += w * py * agree;
                }
            }
        }
        p_x0_given_s.push(x0);
    }
    Ok(SimulatedConversion {
        bsc: InducedBsc::from_agreements(joint_agree[0] / px[0], joint_agree[1] / px[1]),
        p_x0_given_s,
    })
}

pub fn induced_bsc_quantum(ch: &ChannelWithState, p: f64, ang: &AngleScheme) -> Result<InducedBsc> {
    Ok(simulate_conversion(ch, p, ang)?.bsc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloBsc {
    pub estimate: InducedBsc,
    pub std_err_agree0: f64,
    pub std_err_agree1: f64,
    pub std_err_crossover: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Samples the protocol with a `ChaCha8Rng` seeded by `seed`.
///
/// Per sample, in order: state from `P_S`, `X'`, `U` (each a uniform bit),
/// the noise flag (true with probability `1 - p`), the output when noisy,
/// then `Y'` agreeing with `U` with probability `cos^2((eta_y - xi_s)/2)`.
/// This is the exact joint law of the quantum protocol.
pub fn induced_bsc_montecarlo(
    ch: &ChannelWithState,
    p: f64,
    ang: &AngleScheme,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloBsc> {
    let ends = check_inputs(ch, p, ang)?;
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    let states = WeightedIndex::new(ch.state_dist()).map_err(|e| Error::Distribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ny = ch.y_card();
    let mut count = [0u64; 2];
    let mut agree = [0u64; 2];
    for _ in 0..samples {
        let s = states.sample(&mut rng);
        let x_prime = usize::from(rng.random::<bool>());
        let u = usize::from(rng.random::<bool>());
        let x = x_prime ^ u;
        let noisy = rng.random::<f64>() < 1.0 - p;
        let y = if noisy {
            rng.random_range(0..ny)
        } else if x == 0 {
            ends[s].0
        } else {
            ends[s].1
        };
        let same = rng.random::<f64>() < cos2_half(ang.eta[y] - ang.xi[s]);
        let y_prime = if same { u } else { 1 - u };
        count[x] += 1;
        agree[x] += u64::from(y_prime == x_prime);
    }
    let rate = |k: usize| {
        if count[k] == 0 {
            0.5
        } else {
            agree[k] as f64 / count[k] as f64
        }
    };
    let se = |a: f64, n: u64| {
        if n == 0 {
            f64::INFINITY
        } else {
            (a * (1.0 - a) / n as f64).sqrt()
        }
    };
    let (a0, a1) = (rate(0), rate(1));
    let overall = (agree[0] + agree[1]) as f64 / samples as f64;
    Ok(MonteCarloBsc {
        estimate: InducedBsc {
            p_agree_given_x0: a0,
            p_agree_given_x1: a1,
            crossover: 1.0 - overall,
        },
        std_err_agree0: se(a0, count[0]),
        std_err_agree1: se(a1, count[1]),
        std_err_crossover: se(overall, samples),
        samples,
        seed,
    })
}

/// `1 - H_b(agree)`.
pub fn ea_rate(agree: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&agree) {
        return Err(Error::Distribution(format!("agreement probability {agree}")));
    }
    Ok(bsc_capacity_from_bias(agree - 0.5))
}

fn check_m(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::Argument(format!("complete graph needs m >= 3, got {m}")));
    }
    Ok(())
}

/// `cot(pi/2m) / (2(m-1))`, the agreement bias of the noiseless `K_m` scheme.
fn km_bias(m: usize) -> f64 {
    let mf = m as f64;
    1.0 / (PI / (2.0 * mf)).tan() / (2.0 * (mf - 1.0))
}

/// `r_m = 1/2 + cot(pi/2m) / (2(m-1))`.
pub fn r_m(m: usize) -> Result<f64> {
    check_m(m)?;
    Ok(0.5 + km_bias(m))
}

/// `q_{m,p} = p r_m + (1-p)/2`.
pub fn q_mp(m: usize, p: f64) -> Result<f64> {
    check_m(m)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::NoiseParameter(p));
    }
    Ok(0.5 + p * km_bias(m))
}

/// `1 - H_b(q_{m,p})`, the conversion rate alone.
pub fn conversion_rate_km(m: usize, p: f64) -> Result<f64> {
    q_mp(m, p)?;
    Ok(bsc_capacity_from_bias(p * km_bias(m)))
}

/// Best of the classical capacity and the conversion rate for `(K_m, Unif, p)`.
pub fn ea_rate_km(m: usize, p: f64) -> Result<f64> {
    Ok(closed_form_km(m, p)?.max(conversion_rate_km(m, p)?))
}

/// `1 - H_b(cos^2(pi/20))`.
pub fn ea_rate_c5() -> f64 {
    // cos^2(pi/20) - 1/2 = cos(pi/10)/2
    bsc_capacity_from_bias((PI / 10.0).cos() / 2.0)
}
