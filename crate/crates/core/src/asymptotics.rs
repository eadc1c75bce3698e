//! Small-noise behaviour of the noisy complete-graph channel: how much the
//! Bell-pair conversion rate beats the classical capacity as `p -> 0`.

use std::f64::consts::{LN_2, PI};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::closed_form_km;
use crate::conversion::{conversion_rate_km, ea_rate_km};
use crate::{Error, Result};

/// `lim_{m -> inf} 3 cot^2(pi/2m) / (m^2 - 1) = 12 / pi^2`.
pub fn gain_ratio_limit() -> f64 {
    12.0 / (PI * PI)
}

fn bad_noise(p: f64) -> Error {
    if p == 0.0 {
        Error::Argument("the gain ratio at p = 0 is a limit; use gain_ratio_closed_form".into())
    } else {
        Error::NoiseParameter(p)
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::Argument(format!("complete graph needs m >= 3, got {m}")));
    }
    Ok(())
}

/// `lim_{p -> 0} R_EA / C = 3 cot^2(pi/2m) / (m^2 - 1)`.
pub fn gain_ratio_closed_form(m: usize) -> Result<f64> {
    check_m(m)?;
    let mf = m as f64;
    let cot = 1.0 / (PI / (2.0 * mf)).tan();
    Ok(3.0 * cot * cot / (mf * mf - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioSample {
    pub p: f64,
    pub classical: f64,
    pub ea_rate: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioCurve {
    pub m: usize,
    /// Sorted by strictly decreasing `p`.
    pub samples: Vec<RatioSample>,
}

/// `10^-5 .. 1`, ten points per decade, descending.
pub fn default_p_grid() -> Vec<f64> {
    (0..=50).map(|k| 10f64.powf(-(k as f64) / 10.0)).collect()
}

/// Evaluates the classical capacity, the entanglement-assisted rate and their
/// ratio at each `p`. Duplicates are dropped and the samples sorted by
/// decreasing `p`.
pub fn gain_ratio_numeric(m: usize, p_list: &[f64]) -> Result<RatioCurve> {
    check_m(m)?;
    if let Some(&p) = p_list.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(bad_noise(p));
    }
    let mut ps = p_list.to_vec();
    ps.sort_by(|a, b| b.total_cmp(a));
    ps.dedup();
    let samples = ps
        .par_iter()
        .map(|&p| {
            let classical = closed_form_km(m, p)?;
            let ea_rate = ea_rate_km(m, p)?;
            Ok(RatioSample {
                p,
                classical,
                ea_rate,
                ratio: ea_rate / classical,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioCurve { m, samples })
}

/// `(1 - H_b(q_{m,p})) / C(K_m, p)`, the conversion rate alone over the
/// classical capacity.
pub fn conversion_over_classical(m: usize, p: f64) -> Result<f64> {
    if p == 0.0 {
        return Err(bad_noise(p));
    }
    Ok(conversion_rate_km(m, p)? / closed_form_km(m, p)?)
}

/// Leading coefficient `a_m = (m+1) / (6 ln2 (m-1))` of `C(K_m, p) = a_m p^2 + o(p^2)`.
pub fn classical_second_order_coefficient(m: usize) -> Result<f64> {
    check_m(m)?;
    let mf = m as f64;
    Ok((mf + 1.0) / (3.0 * (mf - 1.0)) / (2.0 * LN_2))
}

/// `|C(K_m, p) - a_m p^2| / p^2`.
pub fn second_order_remainder(m: usize, p: f64) -> Result<f64> {
    if p == 0.0 {
        return Err(Error::NoiseParameter(p));
    }
    Ok((closed_form_km(m, p)? - classical_second_order_coefficient(m)? * p * p).abs() / (p * p))
}

/// `c_{m,k} = (m - 2k + 1)/(m - 1)` as exact rationals.
pub fn km_coefficients_exact(m: usize) -> Result<Vec<Ratio<i64>>> {
    check_m(m)?;
    let mi = i64::try_from(m).map_err(|_| Error::Argument("m too large".into()))?;
    Ok((1..=mi).map(|k| Ratio::new(mi - 2 * k + 1, mi - 1)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientIdentities {
    pub sum_is_zero: bool,
    pub sum_of_squares_matches: bool,
}

/// Checks `sum_k c_{m,k} = 0` and `sum_k c_{m,k}^2 = m(m+1)/(3(m-1))` exactly.
pub fn check_coefficient_identities(m: usize) -> Result<CoefficientIdentities> {
    let c = km_coefficients_exact(m)?;
    let mi = m as i64;
    let sum: Ratio<i64> = c.iter().sum();
    let squares: Ratio<i64> = c.iter().map(|v| v * v).sum();
    Ok(CoefficientIdentities {
        sum_is_zero: sum == Ratio::from_integer(0),
        sum_of_squares_matches: squares == Ratio::new(mi * (mi + 1), 3 * (mi - 1)),
    })
}
