//! Rotation numbers of degree-one circle maps via weighted Birkhoff averages.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    /// In [0, 1).
    pub value: f64,
    /// Change against the average over half the orbit.
    pub error: f64,
    pub iterations: usize,
}

/// Checks that `lift` is defined, strictly increasing and of degree one on `samples`
/// points of [0, 2π].
pub fn check_circle_map(lift: &dyn Fn(f64) -> Option<f64>, samples: usize) -> Result<()> {
    let mut prev: Option<f64> = None;
    let mut first = f64::NAN;
    for i in 0..=samples {
        let t = TAU * i as f64 / samples as f64;
        let v = lift(t).ok_or(Error::EscapePoint { f: t })?;
        if let Some(p) = prev {
            if !(v > p) {
                return Err(Error::NotMonotone(t));
            }
        } else {
            first = v;
        }
        prev = Some(v);
    }
    let degree = (prev.unwrap() - first) / TAU;
    if (degree - 1.0).abs() > 1e-9 {
        return Err(Error::NotMonotone(degree));
    }
    Ok(())
}

// exp(−1/(t(1−t))) weights; superconvergent for smooth quasi-periodic data
fn weighted_mean(d: &[f64]) -> f64 {
    let n = d.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &x) in d.iter().enumerate() {
        let t = (i as f64 + 0.5) / n as f64;
        let w = (-1.0 / (t * (1.0 - t))).exp();
        num += w * x;
        den += w;
    }
    num / den
}

/// Rotation number of the circle map with lift `lift` (θ ∈ [0, 2π) ↦ lifted image).
pub fn rotation_number(lift: &dyn Fn(f64) -> Option<f64>, n_iter: usize, tol: f64) -> Result<Rotation> {
    if n_iter < 16 {
        return Err(Error::InvalidParameter(format!("n_iter = {n_iter} too small")));
    }
    check_circle_map(lift, 1024)?;
    let mut x = 0.0f64;
    let mut d = Vec::with_capacity(n_iter);
    for i in 0..n_iter {
        let y = lift(x).ok_or(Error::Escaped { survived: i })?;
        d.push(y - x);
        x = y.rem_euclid(TAU);
    }
    let full = weighted_mean(&d) / TAU;
    let half = weighted_mean(&d[n_iter / 2..]) / TAU;
    let error = (full - half).abs();
    if !(error <= tol) {
        return Err(Error::NoConvergence { iterations: n_iter, residual: error });
    }
    Ok(Rotation { value: full.rem_euclid(1.0), error, iterations: n_iter })
}
