//! Attracting invariant graphs X = g(θ) by the graph transform.

use std::f64::consts::TAU;

use crate::dynamics::rotation::{rotation_number, Rotation};
use crate::error::{Error, Result};
use crate::numerics::find_root;
use crate::retmap::ReducedMap;

/// Horizontal cone half-slope and the expansion thresholds checked along the curve.
pub const CONE_SLOPE: f64 = 0.01;
pub const FORWARD_EXPANSION: f64 = 0.5;
pub const BACKWARD_EXPANSION: f64 = 100.0;

/// Periodic C² cubic spline through equally spaced samples on [0, 2π).
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    y: Vec<f64>,
    m: Vec<f64>,
    h: f64,
}

impl PeriodicSpline {
    pub fn new(y: Vec<f64>) -> Self {
        let n = y.len();
        let h = TAU / n as f64;
        if n < 3 {
            return PeriodicSpline { m: vec![0.0; n], y, h };
        }
        // M_{i−1} + 4 M_i + M_{i+1} = 6 (y_{i−1} − 2 y_i + y_{i+1}) / h², cyclic
        let rhs: Vec<f64> =
            (0..n).map(|i| 6.0 * (y[(i + n - 1) % n] - 2.0 * y[i] + y[(i + 1) % n]) / (h * h)).collect();
        let m = solve_cyclic(n, &rhs);
        PeriodicSpline { y, m, h }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.y.len();
        let x = t.rem_euclid(TAU) / self.h;
        let i = (x.floor() as usize).min(n - 1);
        let s = x - i as f64;
        let j = (i + 1) % n;
        let (a, b) = (1.0 - s, s);
        let h2 = self.h * self.h / 6.0;
        a * self.y[i] + b * self.y[j] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[j]) * h2
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

// cyclic tridiagonal (1, 4, 1) by Sherman–Morrison
fn solve_cyclic(n: usize, d: &[f64]) -> Vec<f64> {
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    let thomas = |r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = 1.0 / diag[0];
        x[0] = r[0] / diag[0];
        for i in 1..n {
            let den = diag[i] - c[i - 1];
            c[i] = 1.0 / den;
            x[i] = (r[i] - x[i - 1]) / den;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };
    let y = thomas(d);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = thomas(&u);
    let fact = (y[0] + y[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    y.iter().zip(&z).map(|(a, b)| a - fact * b).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct CurveOptions {
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Orbit length for the rotation number of the induced circle map.
    pub rotation_iter: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { grid_n: 2048, tol: 1e-10, max_iter: 500, rotation_iter: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeReport {
    /// max |slope| of the image of the horizontal cone edges.
    pub slope_max: f64,
    /// min |Jv|/|v| over horizontal cone vectors.
    pub forward_min: f64,
    /// min |J⁻¹v|/|v| over vertical cone vectors.
    pub backward_min: f64,
    pub pass: bool,
    /// θ where the tightest condition is worst.
    pub worst_theta: f64,
}

#[derive(Debug, Clone)]
pub struct InvariantCurveResult {
    pub theta: Vec<f64>,
    pub g: Vec<f64>,
    /// sup |g_{n+1} − g_n| per iteration.
    pub residuals: Vec<f64>,
    /// One extra transform of the converged curve.
    pub reapply_residual: f64,
    /// Lifted induced map θ ↦ θ₁(θ, g(θ)) on the grid.
    pub induced: Vec<f64>,
    pub induced_monotone: bool,
    pub rotation: Option<Rotation>,
    pub cones: ConeReport,
}

impl InvariantCurveResult {
    pub fn residuals_decreasing(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] <= w[0] || w[1] < 1e-14)
    }
}

fn induced_lift(map: &ReducedMap, g: &PeriodicSpline, t: f64) -> Option<f64> {
    map.apply_lifted(t, g.eval(t)).map(|p| p.0)
}

// one graph-transform step: g_new(τ) = X₁(θ, g(θ)) where θ₁(θ, g(θ)) ≡ τ
fn transform(map: &ReducedMap, g: &PeriodicSpline, theta: &[f64]) -> Result<Vec<f64>> {
    let n = theta.len();
    let mut h = Vec::with_capacity(n + 1);
    for &t in theta.iter().chain(std::iter::once(&TAU)) {
        h.push(induced_lift(map, g, t).ok_or(Error::EscapePoint { f: map.f_value(t, g.eval(t)) })?);
    }
    if h.windows(2).any(|w| !(w[1] > w[0])) || ((h[n] - h[0]) - TAU).abs() > 1e-8 {
        return Err(Error::NotMonotone(h[n] - h[0]));
    }
    let mut out = Vec::with_capacity(n);
    for &target in theta {
        let tau = h[0] + (target - h[0]).rem_euclid(TAU);
        let j = h.partition_point(|&v| v <= tau).clamp(1, n) - 1;
        let hi = if j + 1 < n { theta[j + 1] } else { TAU };
        let root = if (h[j] - tau).abs() == 0.0 {
            theta[j]
        } else {
            find_root(|t| induced_lift(map, g, t).unwrap_or(f64::NAN) - tau, theta[j], hi, 1e-15)?
        };
        let x =
            map.apply_lifted(root, g.eval(root)).ok_or(Error::EscapePoint { f: map.f_value(root, g.eval(root)) })?.1;
        out.push(x);
    }
    Ok(out)
}

fn cone_report(map: &ReducedMap, theta: &[f64], g: &[f64]) -> Result<ConeReport> {
    let (mut slope_max, mut fwd, mut bwd) = (0.0f64, f64::INFINITY, f64::INFINITY);
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for (&t, &x) in theta.iter().zip(g) {
        let j = map.jacobian(t, x)?;
        let inv = map.jacobian_inverse(t, x).ok();
        for s in [-CONE_SLOPE, 0.0, CONE_SLOPE] {
            let (u0, u1) = (j[0][0] + j[0][1] * s, j[1][0] + j[1][1] * s);
            let slope = (u1 / u0).abs();
            let ex = u0.hypot(u1) / 1f64.hypot(s);
            slope_max = slope_max.max(slope);
            fwd = fwd.min(ex);
            let back = match inv {
                Some(ji) => (ji[0][0] * s + ji[0][1]).hypot(ji[1][0] * s + ji[1][1]) / 1f64.hypot(s),
                None => f64::INFINITY,
            };
            bwd = bwd.min(back);
            // worst violation measured relative to each threshold
            let badness = (slope / CONE_SLOPE).max(FORWARD_EXPANSION / ex).max(BACKWARD_EXPANSION / back);
            if badness > worst.0 {
                worst = (badness, t);
            }
        }
    }
    Ok(ConeReport {
        slope_max,
        forward_min: fwd,
        backward_min: bwd,
        pass: slope_max < CONE_SLOPE && fwd > FORWARD_EXPANSION && bwd > BACKWARD_EXPANSION,
        worst_theta: worst.1,
    })
}

/// Graph transform from g ≡ 0 until the sup change drops below `tol`.
pub fn invariant_curve(map: &ReducedMap, o: &CurveOptions) -> Result<InvariantCurveResult> {
    if o.grid_n < 8 {
        return Err(Error::InvalidParameter(format!("grid_n = {} too small", o.grid_n)));
    }
    let n = o.grid_n;
    let theta: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let mut g = PeriodicSpline::new(vec![0.0; n]);
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..o.max_iter {
        let next = transform(map, &g, &theta)?;
        let r = next.iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !r.is_finite() {
            return Err(Error::NoConvergence { iterations: residuals.len(), residual: r });
        }
        residuals.push(r);
        g = PeriodicSpline::new(next);
        if r < o.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: residuals.len(),
            residual: *residuals.last().unwrap_or(&f64::NAN),
        });
    }
    let again = transform(map, &g, &theta)?;
    let reapply_residual = again.iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let induced: Vec<f64> = theta.iter().map(|&t| induced_lift(map, &g, t).unwrap_or(f64::NAN)).collect();
    let induced_monotone = induced.windows(2).all(|w| w[1] > w[0]);
    let rotation = if induced_monotone {
        rotation_number(&|t| induced_lift(map, &g, t), o.rotation_iter, 1e-6).ok()
    } else {
        None
    };
    let cones = cone_report(map, &theta, g.values())?;
    Ok(InvariantCurveResult {
        theta,
        g: g.values().to_vec(),
        residuals,
        reapply_residual,
        induced,
        induced_monotone,
        rotation,
        cones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_smooth_periodic_data() {
        let n = 256;
        let y: Vec<f64> =
            (0..n).map(|i| (TAU * i as f64 / n as f64).sin() + 0.3 * (2.0 * TAU * i as f64 / n as f64).cos()).collect();
        let s = PeriodicSpline::new(y);
        for k in 0..997 {
            let t = 0.0063 * k as f64 + 0.001;
            let exact = t.sin() + 0.3 * (2.0 * t).cos();
            assert!((s.eval(t) - exact).abs() < 1e-7, "{t}");
        }
        assert!((s.eval(TAU + 0.1) - s.eval(0.1)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_curve_is_zero() {
        let m = ReducedMap::new(1.0, 0.0, 0.1, 0.05, 2.0, 1e-3, 1.1);
        let r = invariant_curve(&m, &CurveOptions { grid_n: 64, ..Default::default() }).unwrap();
        assert_eq!(r.residuals.len(), 1);
        assert!(r.g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn contracting_map_converges_with_cones() {
        let m = ReducedMap::new(1.0, 1e-6, 0.1, 0.1, 2.0, 1e-4, 1.1);
        let r = invariant_curve(&m, &CurveOptions { grid_n: 256, ..Default::default() }).unwrap();
        assert!(r.residuals_decreasing(), "{:?}", r.residuals);
        assert!(r.reapply_residual < 2e-10);
        assert!(r.induced_monotone);
        assert!(r.cones.pass, "{:?}", r.cones);
        assert!(r.rotation.is_some());
    }

    #[test]
    fn folding_breaks_the_cones() {
        let m = ReducedMap::new(1.0, 1e-6, 0.1, 0.1, 2.0, 100.0, 1.1);
        match invariant_curve(&m, &CurveOptions { grid_n: 256, ..Default::default() }) {
            Ok(r) => assert!(!r.cones.pass),
            Err(e) => assert!(matches!(e, Error::NotMonotone(_))),
        }
    }
}
