//! Base-2 entropies with the `0 log 0 = 0` convention.

use std::f64::consts::LN_2;

use crate::{Error, Result};

fn check_dist(dist: &[f64]) -> Result<()> {
    if let Some((i, &v)) = dist.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::Distribution(format!("entry {i} is {v}")));
    }
    Ok(())
}

/// `-p log2 p`, zero at `p = 0`.
pub fn neg_xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub fn entropy(dist: &[f64]) -> Result<f64> {
    check_dist(dist)?;
    Ok(dist.iter().map(|&p| neg_xlog2x(p)).sum())
}

pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Distribution(format!("binary entropy of {q}")));
    }
    Ok(neg_xlog2x(q) + neg_xlog2x(1.0 - q))
}

/// `I(X;Y)` of a joint distribution `joint[x][y]`.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    let cols = joint.first().map_or(0, Vec::len);
    if joint.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("ragged joint distribution".into()));
    }
    for row in joint {
        check_dist(row)?;
    }
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..cols).map(|y| joint.iter().map(|r| r[y]).sum()).collect();
    let mut mi = 0.0;
    for (x, row) in joint.iter().enumerate() {
        for (y, &pxy) in row.iter().enumerate() {
            if pxy > 0.0 {
                mi += pxy * (pxy / (px[x] * py[y])).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// `(1+x) ln(1+x) - x` for `x >= -1`, accurate for tiny `|x|`.
///
/// Summing this instead of `(1+x) ln(1+x)` drops linear terms that cancel
/// exactly, which matters when two `O(p^2)` quantities are divided.
pub fn one_plus_x_ln_one_plus_x_minus_x(x: f64) -> f64 {
    debug_assert!(x >= -1.0);
    if x == -1.0 {
        return 1.0;
    }
    if x.abs() < 1e-2 {
        // sum_{n>=2} (-1)^n x^n / (n(n-1))
        let mut term = x * x;
        let mut sum = 0.0;
        for n in 2..=14u32 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * term / f64::from(n * (n - 1));
            term *= x;
        }
        sum
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

/// `1 - H_b(1/2 + bias)`, evaluated without cancellation near `bias = 0`.
pub fn bsc_capacity_from_bias(bias: f64) -> f64 {
    let d = 2.0 * bias;
    (one_plus_x_ln_one_plus_x_minus_x(d) + one_plus_x_ln_one_plus_x_minus_x(-d)) / (2.0 * LN_2)
}
