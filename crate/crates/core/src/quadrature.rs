//! Periodic trapezoid rule with node doubling.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::weyl::cis;

pub const MIN_NODES: usize = 32;
pub const MAX_NODES: usize = 1 << 16;
/// Successive refinements closer than this are accepted.
pub const SETTLE_TOL: f64 = 1e-10;
/// At the node budget, a remaining disagreement above this is an error.
pub const FAIL_TOL: f64 = 1e-8;

/// Fourier coefficients `∫₀¹ e^{-2πinx} f(x) dx` for `n ∈ [-n_max, n_max]`
/// of a 1-periodic `f`, refined by doubling until every coefficient settles.
pub fn fourier_coeffs(f: impl Fn(f64) -> Complex64, n_max: i64) -> Result<Vec<Complex64>> {
    let mut nodes = MIN_NODES.max(4 * n_max as usize + 4).next_power_of_two();
    let mut samples: Vec<Complex64> = (0..nodes).map(|j| f(j as f64 / nodes as f64)).collect();
    let mut prev = coeffs_from_samples(&samples, n_max);
    loop {
        let finer = nodes * 2;
        let mut next = Vec::with_capacity(finer);
        for (j, &s) in samples.iter().enumerate() {
            next.push(s);
            next.push(f((2 * j + 1) as f64 / finer as f64));
        }
        samples = next;
        nodes = finer;
        let cur = coeffs_from_samples(&samples, n_max);
        let diff = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff <= SETTLE_TOL {
            return Ok(cur);
        }
        if nodes >= MAX_NODES {
            if diff > FAIL_TOL {
                return Err(Error::Accuracy(format!(
                    "trapezoid did not settle: change {diff:e} at {nodes} nodes"
                )));
            }
            return Ok(cur);
        }
        prev = cur;
    }
}

/// `∫₀¹ f(x) dx` for a 1-periodic `f`.
pub fn periodic_integral(f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    Ok(fourier_coeffs(f, 0)?[0])
}

fn coeffs_from_samples(samples: &[Complex64], n_max: i64) -> Vec<Complex64> {
    let len = samples.len() as f64;
    (-n_max..=n_max)
        .map(|n| {
            let step = -2.0 * PI * n as f64 / len;
            samples.iter().enumerate().map(|(j, &s)| s * cis(step * j as f64)).sum::<Complex64>() / len
        })
        .collect()
}
