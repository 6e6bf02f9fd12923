//! Attracting periodic orbits found by forward iteration from a seed grid.

use std::f64::consts::TAU;

use crate::retmap::{mat_mul, Mat2, ReducedMap};

pub const RECURRENCE_TOL: f64 = 1e-8;
pub const PERIOD_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Sink {
    pub period: usize,
    /// Eigenvalues of the period-map Jacobian, largest modulus first.
    pub multipliers: [f64; 2],
    /// Product of det J around the orbit.
    pub det_product: f64,
    /// Seeds attracted to this orbit.
    pub basin: usize,
    pub orbit: Vec<(f64, f64)>,
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn close(p: (f64, f64), q: (f64, f64), tol: f64) -> bool {
    circle_dist(p.0, q.0) < tol && (p.1 - q.1).abs() < tol * (1.0 + p.1.abs())
}

// moduli of the eigenvalues of a 2×2 real matrix, largest first
fn eigen_moduli(m: &Mat2) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let (l1, l2) = (0.5 * (tr + s), 0.5 * (tr - s));
        if l1.abs() >= l2.abs() {
            [l1.abs(), l2.abs()]
        } else {
            [l2.abs(), l1.abs()]
        }
    } else {
        let r = det.abs().sqrt();
        [r, r]
    }
}

fn orbit_jacobian(map: &ReducedMap, orbit: &[(f64, f64)]) -> Option<(Mat2, f64)> {
    let mut m: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut d = 1.0;
    for &(t, x) in orbit {
        m = mat_mul(&map.jacobian(t, x).ok()?, &m);
        d *= map.det_jacobian(t, x).ok()?;
    }
    Some((m, d))
}

/// Iterates each θ-grid seed (X = 0) `n_iter` times, then looks for a return
/// within RECURRENCE_TOL in at most PERIOD_CAP further steps.
pub fn find_sinks(map: &ReducedMap, theta_grid: &[f64], n_iter: usize) -> Vec<Sink> {
    let mut sinks: Vec<Sink> = Vec::new();
    'seeds: for &t0 in theta_grid {
        let mut p = (t0, 0.0);
        for _ in 0..n_iter {
            match map.apply(p.0, p.1).point() {
                Some(q) => p = q,
                None => continue 'seeds,
            }
        }
        let mut orbit = vec![p];
        let mut period = None;
        for n in 1..=PERIOD_CAP {
            let q = match map.apply(orbit[n - 1].0, orbit[n - 1].1).point() {
                Some(q) => q,
                None => continue 'seeds,
            };
            if close(q, p, RECURRENCE_TOL) {
                period = Some(n);
                break;
            }
            orbit.push(q);
        }
        let Some(period) = period else { continue };
        if let Some(s) = sinks.iter_mut().find(|s| s.period == period && s.orbit.iter().any(|&q| close(q, p, 1e-6))) {
            s.basin += 1;
            continue;
        }
        let Some((m, det_product)) = orbit_jacobian(map, &orbit) else { continue };
        let multipliers = eigen_moduli(&m);
        if multipliers[0] < 1.0 {
            sinks.push(Sink { period, multipliers, det_product, basin: 1, orbit });
        }
    }
    sinks.sort_by(|a, b| a.period.cmp(&b.period).then(b.basin.cmp(&a.basin)));
    sinks
}
