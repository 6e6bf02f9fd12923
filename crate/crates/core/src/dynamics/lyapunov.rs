//! Lyapunov exponents of the annulus map by QR re-orthonormalization.

use crate::error::{Error, Result};
use crate::retmap::{mat_mul, MapOutcome, Mat2, ReducedMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lyapunov {
    pub l1: f64,
    pub l2: f64,
    /// Birkhoff average of ln|det J| along the same orbit.
    pub mean_log_det: f64,
    pub iterations: usize,
    /// Steps whose image left |X| ≤ 1 (the orbit is continued with the same formula).
    pub range_exits: usize,
    pub end: (f64, f64),
}

// Gram-Schmidt on the columns of m: returns (Q, r11, r22)
fn qr(m: &Mat2) -> (Mat2, f64, f64) {
    let c0 = [m[0][0], m[1][0]];
    let r11 = c0[0].hypot(c0[1]);
    let q0 = [c0[0] / r11, c0[1] / r11];
    let c1 = [m[0][1], m[1][1]];
    let r12 = q0[0] * c1[0] + q0[1] * c1[1];
    let v = [c1[0] - r12 * q0[0], c1[1] - r12 * q0[1]];
    let r22 = v[0].hypot(v[1]);
    let q1 = if r22 > 0.0 { [v[0] / r22, v[1] / r22] } else { [-q0[1], q0[0]] };
    ([[q0[0], q1[0]], [q0[1], q1[1]]], r11, r22)
}

/// Exponents along the orbit of `seed` after `n_transient` discarded steps.
pub fn lyapunov(map: &ReducedMap, seed: (f64, f64), n_iter: usize, n_transient: usize) -> Result<Lyapunov> {
    if n_iter == 0 {
        return Err(Error::InvalidParameter("n_iter must be positive".into()));
    }
    let (mut t, mut x) = seed;
    let mut range_exits = 0;
    let step = |t: &mut f64, x: &mut f64, i: usize, exits: &mut usize| -> Result<()> {
        match map.apply(*t, *x) {
            MapOutcome::Next { theta, x: x1 } => {
                *t = theta;
                *x = x1;
            }
            MapOutcome::RangeExit { theta, x: x1 } => {
                *t = theta;
                *x = x1;
                *exits += 1;
            }
            MapOutcome::Escape { .. } => return Err(Error::Escaped { survived: i }),
        }
        Ok(())
    };
    let mut dummy = 0;
    for i in 0..n_transient {
        step(&mut t, &mut x, i, &mut dummy)?;
    }
    let mut q: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let (mut s1, mut s2, mut sd) = (0.0, 0.0, 0.0);
    for i in 0..n_iter {
        let j = map.jacobian(t, x).map_err(|_| Error::Escaped { survived: n_transient + i })?;
        sd += map.det_jacobian(t, x)?.abs().ln();
        let (qn, r11, r22) = qr(&mat_mul(&j, &q));
        s1 += r11.ln();
        s2 += r22.ln();
        q = qn;
        step(&mut t, &mut x, n_transient + i, &mut range_exits)?;
    }
    let n = n_iter as f64;
    let (a, b) = (s1 / n, s2 / n);
    Ok(Lyapunov { l1: a.max(b), l2: a.min(b), mean_log_det: sd / n, iterations: n_iter, range_exits, end: (t, x) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_rotation_is_neutral() {
        let m = ReducedMap::new(1.0, 1e-3, 0.0, 0.2, 1.3, 0.7, 1.1);
        let l = lyapunov(&m, (0.3, 0.0), 20_000, 100).unwrap();
        assert!(l.l1.abs() < 1e-3, "{l:?}");
        assert!((l.l1 + l.l2 - l.mean_log_det).abs() < 1e-6);
    }

    #[test]
    fn sink_has_negative_exponent() {
        // f′ = 1 − w c cos θ / F is small near the fixed point chosen by a
        let m = ReducedMap::new(0.0, 1e-3, 0.5, 0.1, 1.0, 2.0, 1.2);
        let m = m.with_a(2.0 * (1.0 + 0.5 * 0.3f64.sin()).ln());
        let l = lyapunov(&m, (0.3, 0.0), 10_000, 1000).unwrap();
        assert!(l.l1 < 0.0, "{l:?}");
        assert!((l.l1 + l.l2 - l.mean_log_det).abs() < 1e-6);
    }

    #[test]
    fn escaping_orbit_reports_survival() {
        let m = ReducedMap::new(0.0, 1e-3, 1.0, 0.0, 0.5, 1.0, 1.1);
        match lyapunov(&m, (1.5 * std::f64::consts::PI, 0.0), 10, 0) {
            Err(Error::Escaped { survived }) => assert_eq!(survived, 0),
            other => panic!("{other:?}"),
        }
    }
}
