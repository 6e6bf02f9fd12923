//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    /// Absolute error target.
    pub tol: f64,
    pub max_subdivisions: usize,
}

impl QuadSettings {
    pub fn new(tol: f64) -> Self {
        QuadSettings { tol, max_subdivisions: 20_000 }
    }

    /// Half-width used in place of an infinite limit.
    pub fn truncation(&self) -> f64 {
        30f64.max((10.0 / self.tol).ln())
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Segment { a, b, value: k * h, error: ((k - g) * h).abs() }
}

/// ∫_a^b f with absolute error ≤ tol. Infinite limits are replaced by ±T with
/// T = max(30, ln(10/tol)), which assumes at least e^{−|s|/2} decay.
pub fn quad<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    quad_with(f, a, b, &QuadSettings::new(tol))
}

pub fn quad_with<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, set: &QuadSettings) -> Result<f64> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidParameter("NaN integration limit".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return quad_with(f, b, a, set).map(|v| -v);
    }
    let t = set.truncation();
    let lo = if a == f64::NEG_INFINITY { (-t).min(b - t) } else { a };
    let hi = if b == f64::INFINITY { t.max(lo + t) } else { b };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter("integration limits".into()));
    }

    let pieces = ((hi - lo) / 4.0).ceil().clamp(1.0, 64.0) as usize;
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for i in 0..pieces {
        let x0 = lo + (hi - lo) * i as f64 / pieces as f64;
        let x1 = if i + 1 == pieces { hi } else { lo + (hi - lo) * (i + 1) as f64 / pieces as f64 };
        let s = kronrod(&mut f, x0, x1);
        total += s.value;
        err += s.error;
        heap.push(s);
    }
    let mut n = pieces;
    while !(err <= set.tol) {
        if !total.is_finite() || err.is_nan() {
            return Err(Error::Quadrature { a, b, value: total, error: err });
        }
        if n >= set.max_subdivisions {
            return Err(Error::Quadrature { a, b, value: total, error: err });
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // cannot split further in floating point
            return Err(Error::Quadrature { a, b, value: total, error: err });
        }
        let l = kronrod(&mut f, worst.a, m);
        let r = kronrod(&mut f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        n += 1;
        if n % 64 == 0 {
            // refresh the running sums to shed accumulated cancellation
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial() {
        let v = quad(|x| x * x, 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian() {
        let v = quad(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-11).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn odd_loop_integrand_vanishes() {
        // e^{3s}(1 − e^{2s})/(e^{2s}+1)^4 is odd under s → −s
        let f = |s: f64| {
            let w = (-2.0 * s.abs()).exp();
            let v = (-s.abs()).exp() * (w - 1.0) / (1.0 + w).powi(4) * w;
            if s >= 0.0 {
                v
            } else {
                -v
            }
        };
        let v = quad(f, f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        assert!(v.abs() < 1e-12);
        let half = quad(f, 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!(half.abs() > 1e-3);
    }

    #[test]
    fn oscillatory() {
        let w = 120.0;
        let v = quad(|x| (w * x).cos() * (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-12).unwrap();
        let want = PI.sqrt() * (-w * w / 4.0).exp();
        assert!((v - want).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits() {
        let v = quad(|x| x, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-13);
    }

    #[test]
    fn halving_tolerance_does_not_hurt() {
        let e: Vec<f64> = [1e-6, 5e-7, 2.5e-7]
            .iter()
            .map(|&t| (quad(|x| 1.0 / (1.0 + x * x), -50.0, 50.0, t).unwrap() - 2.0 * 50f64.atan()).abs())
            .collect();
        assert!(e.iter().all(|&x| x <= 1e-6), "{e:?}");
    }

    #[test]
    fn reports_non_convergence() {
        let set = QuadSettings { tol: 1e-14, max_subdivisions: 10 };
        assert!(quad_with(|x: f64| (x + 0.3).abs().sqrt().recip(), -1.0, 1.0, &set).is_err());
        assert!(quad(|x: f64| x.abs().sqrt().recip(), -1.0, 1.0, 1e-8).is_err());
    }
}
