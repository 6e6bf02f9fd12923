//! The reduced annulus map
//!   θ₁ = θ + a − (ω/β) ln F,  X₁ = b F^{α/β},  F = ρ + c sin θ + k X,
//! undefined (escape) where F ≤ 0.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::numerics::find_root;

pub type Mat2 = [[f64; 2]; 2];

/// F values below this are treated as escapes.
pub const F_MIN: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMap {
    /// Phase constant mod 2π.
    pub a: f64,
    /// The phase constant as computed, before reduction.
    pub a_unreduced: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
    pub rho: f64,
    /// ω/β
    pub omega_beta: f64,
    /// α/β
    pub alpha_beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapOutcome {
    Next {
        theta: f64,
        x: f64,
    },
    /// Image outside the chart |X| ≤ 1; the values are still those of the formula.
    RangeExit {
        theta: f64,
        x: f64,
    },
    Escape {
        theta: f64,
        f: f64,
    },
}

impl MapOutcome {
    /// The image point, whether or not it left the chart.
    pub fn point(&self) -> Option<(f64, f64)> {
        match *self {
            MapOutcome::Next { theta, x } | MapOutcome::RangeExit { theta, x } => Some((theta, x)),
            MapOutcome::Escape { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome1d {
    Next(f64),
    Escape { theta: f64, f: f64 },
}

/// Where the 1-D map is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Circle,
    /// V = (lo, hi), lifted so that lo < hi < lo + 2π; the rest is the escape set U.
    Arc {
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub lo: f64,
    pub hi: f64,
    /// +1 increasing, −1 decreasing.
    pub sign: i8,
    /// |f(hi) − f(lo)| / 2π.
    pub wraps: f64,
    /// For the partial regime: whether the branch maps onto a whole lifted copy of V.
    pub full: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPartition {
    pub domain: Domain,
    pub critical_points: Vec<f64>,
    /// Lifted values f(θ_c).
    pub critical_values: Vec<f64>,
    pub branches: Vec<Branch>,
    /// Enumeration stopped at the wrap cap (or at floating-point resolution near ∂V).
    pub truncated: bool,
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn mat_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn inverse(a: &Mat2) -> Result<Mat2> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Singular(d));
    }
    Ok([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

impl ReducedMap {
    pub fn new(a_unreduced: f64, b: f64, c: f64, k: f64, rho: f64, omega_beta: f64, alpha_beta: f64) -> Self {
        ReducedMap { a: a_unreduced.rem_euclid(TAU), a_unreduced, b, c, k, rho, omega_beta, alpha_beta }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.b >= 0.0
            && self.c >= 0.0
            && self.k >= 0.0
            && self.rho > 0.0
            && self.omega_beta >= 0.0
            && self.alpha_beta >= 1.0;
        let finite =
            [self.a, self.b, self.c, self.k, self.rho, self.omega_beta, self.alpha_beta].iter().all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("reduced map out of range: {self:?}")))
        }
    }

    /// Same map with a different phase constant.
    pub fn with_a(&self, a: f64) -> Self {
        ReducedMap { a: a.rem_euclid(TAU), a_unreduced: a, ..*self }
    }

    pub fn f_value(&self, theta: f64, x: f64) -> f64 {
        self.rho + self.c * theta.sin() + self.k * x
    }

    pub fn apply(&self, theta: f64, x: f64) -> MapOutcome {
        let f = self.f_value(theta, x);
        if !(f > F_MIN) {
            return MapOutcome::Escape { theta, f };
        }
        let t1 = (theta + self.a - self.omega_beta * f.ln()).rem_euclid(TAU);
        let x1 = self.b * f.powf(self.alpha_beta);
        if x1.abs() > 1.0 {
            MapOutcome::RangeExit { theta: t1, x: x1 }
        } else {
            MapOutcome::Next { theta: t1, x: x1 }
        }
    }

    /// Lifted θ₁ (no reduction) and X₁, or None on escape.
    pub fn apply_lifted(&self, theta: f64, x: f64) -> Option<(f64, f64)> {
        let f = self.f_value(theta, x);
        (f > F_MIN).then(|| (theta + self.a - self.omega_beta * f.ln(), self.b * f.powf(self.alpha_beta)))
    }

    pub fn jacobian(&self, theta: f64, x: f64) -> Result<Mat2> {
        let f = self.f_value(theta, x);
        if !(f > F_MIN) {
            return Err(Error::EscapePoint { f });
        }
        let (w, r) = (self.omega_beta, self.alpha_beta);
        let ft = self.c * theta.cos();
        let g = r * self.b * f.powf(r - 1.0);
        Ok([[1.0 - w * ft / f, -w * self.k / f], [g * ft, g * self.k]])
    }

    /// (α/β) b k F^{α/β−1}; the θ-derivative terms cancel.
    pub fn det_jacobian(&self, theta: f64, x: f64) -> Result<f64> {
        let f = self.f_value(theta, x);
        if !(f > F_MIN) {
            return Err(Error::EscapePoint { f });
        }
        Ok(self.alpha_beta * self.b * self.k * f.powf(self.alpha_beta - 1.0))
    }

    pub fn jacobian_inverse(&self, theta: f64, x: f64) -> Result<Mat2> {
        let j = self.jacobian(theta, x)?;
        let d = self.det_jacobian(theta, x)?;
        if d == 0.0 {
            return Err(Error::Singular(d));
        }
        Ok([[j[1][1] / d, -j[0][1] / d], [-j[1][0] / d, j[0][0] / d]])
    }

    /// Singular limit b = k = 0: f(θ) = θ + a − (ω/β) ln(ρ + c sin θ), reduced mod 2π.
    pub fn apply_1d(&self, theta: f64) -> Outcome1d {
        match self.lift_1d(theta) {
            Some(t) => Outcome1d::Next(t.rem_euclid(TAU)),
            None => Outcome1d::Escape { theta, f: self.f_value(theta, 0.0) },
        }
    }

    pub fn lift_1d(&self, theta: f64) -> Option<f64> {
        let f = self.f_value(theta, 0.0);
        (f > F_MIN).then(|| theta + self.a - self.omega_beta * f.ln())
    }

    pub fn derivative_1d(&self, theta: f64) -> f64 {
        1.0 - self.omega_beta * self.c * theta.cos() / self.f_value(theta, 0.0)
    }

    /// Escape arc U = (π + arcsin(ρ/c), 2π − arcsin(ρ/c)) of the 1-D map, if any.
    pub fn escape_interval(&self) -> Option<(f64, f64)> {
        if self.c <= 0.0 || self.rho >= self.c {
            return None;
        }
        let s = (self.rho / self.c).asin();
        Some((PI + s, TAU - s))
    }

    pub fn domain(&self) -> Domain {
        match self.escape_interval() {
            None => Domain::Circle,
            Some((u_lo, u_hi)) => Domain::Arc { lo: u_hi - TAU, hi: u_lo },
        }
    }

    /// Zeros of f′ where F > 0, in [0, 2π) for the total map and inside V otherwise.
    pub fn critical_points(&self) -> Vec<f64> {
        let (w, c) = (self.omega_beta, self.c);
        if c <= 0.0 || w <= 0.0 {
            return Vec::new();
        }
        // f′ = 0  ⇔  ρ + c sin θ − w c cos θ = 0  ⇔  sin(θ − φ) = −ρ / (c √(1+w²)), tan φ = w
        let amp = c * (1.0 + w * w).sqrt();
        let ratio = -self.rho / amp;
        if ratio.abs() > 1.0 {
            return Vec::new();
        }
        let phi = w.atan();
        let base = ratio.asin();
        let mut out: Vec<f64> =
            [phi + base, phi + PI - base].into_iter().filter(|&t| self.f_value(t, 0.0) > 0.0).collect();
        match self.domain() {
            Domain::Circle => {
                for t in &mut out {
                    *t = t.rem_euclid(TAU);
                }
            }
            Domain::Arc { lo, .. } => {
                for t in &mut out {
                    *t = lo + (*t - lo).rem_euclid(TAU);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        out
    }

    /// Maximal monotone branches of the 1-D map. In the partial regime each branch
    /// is a preimage of one lifted copy of V, at most `w_max` per side of each fold.
    pub fn branch_partition(&self, w_max: usize) -> BranchPartition {
        let crit = self.critical_points();
        let cvals: Vec<f64> = crit.iter().filter_map(|&t| self.lift_1d(t)).collect();
        match self.domain() {
            Domain::Circle => {
                let mut cuts = crit.clone();
                if cuts.is_empty() {
                    cuts.push(0.0);
                }
                let n = cuts.len();
                let branches = (0..n)
                    .map(|i| {
                        let lo = cuts[i];
                        let hi = if i + 1 < n { cuts[i + 1] } else { cuts[0] + TAU };
                        let (flo, fhi) = (self.lift_1d(lo).unwrap(), self.lift_1d(hi).unwrap());
                        let mid = self.derivative_1d(0.5 * (lo + hi));
                        Branch {
                            lo,
                            hi,
                            sign: if mid >= 0.0 { 1 } else { -1 },
                            wraps: (fhi - flo).abs() / TAU,
                            full: true,
                        }
                    })
                    .collect();
                BranchPartition {
                    domain: Domain::Circle,
                    critical_points: crit,
                    critical_values: cvals,
                    branches,
                    truncated: false,
                }
            }
            Domain::Arc { lo, hi } => self.partial_branches(lo, hi, crit, cvals, w_max),
        }
    }

    fn partial_branches(&self, v_lo: f64, v_hi: f64, crit: Vec<f64>, cvals: Vec<f64>, w_max: usize) -> BranchPartition {
        let mut branches = Vec::new();
        let mut truncated = false;
        // monotone pieces between ∂V and the folds
        let mut cuts = vec![v_lo];
        cuts.extend(crit.iter().copied());
        cuts.push(v_hi);
        let eps: f64 = 1e-15;
        for i in 0..cuts.len() - 1 {
            let (a, b) = (cuts[i], cuts[i + 1]);
            // shrink to points where f is finite
            let (a_in, b_in) = (
                if i == 0 { a + eps.max(a.abs() * 4.0 * f64::EPSILON) } else { a },
                if i + 2 == cuts.len() { b - eps.max(b.abs() * 4.0 * f64::EPSILON) } else { b },
            );
            let (fa, fb) = match (self.lift_1d(a_in), self.lift_1d(b_in)) {
                (Some(x), Some(y)) => (x, y),
                _ => continue,
            };
            let sign: i8 = if fb > fa { 1 } else { -1 };
            let (f_min, f_max) = (fa.min(fb), fa.max(fb));
            // lifted copies V + 2πn fully inside (f_min, f_max)
            let first = ((f_min - v_lo) / TAU).ceil() as i64;
            let mut count = 0usize;
            let mut n = first;
            loop {
                let (t_lo, t_hi) = (v_lo + TAU * n as f64, v_hi + TAU * n as f64);
                if t_hi > f_max {
                    if count < w_max && (a_in - a).abs() + (b - b_in).abs() > 0.0 {
                        truncated = true;
                    }
                    break;
                }
                if count >= w_max {
                    truncated = true;
                    break;
                }
                let solve =
                    |target: f64| find_root(|t| self.lift_1d(t).unwrap_or(f64::INFINITY) - target, a_in, b_in, 1e-14);
                if let (Ok(x0), Ok(x1)) = (solve(t_lo), solve(t_hi)) {
                    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
                    branches.push(Branch { lo, hi, sign, wraps: (v_hi - v_lo) / TAU, full: true });
                }
                count += 1;
                n += 1;
            }
            // the stretch between the fold and the first full copy
            if !crit.is_empty() {
                let partial_lo = v_lo + TAU * (first - 1) as f64;
                let partial_hi = v_hi + TAU * (first - 1) as f64;
                if f_min < partial_hi && f_min > partial_lo - 1e-300 {
                    let edge = if sign > 0 { a } else { b };
                    let other = find_root(|t| self.lift_1d(t).unwrap_or(f64::INFINITY) - partial_hi, a_in, b_in, 1e-14);
                    if let Ok(o) = other {
                        let (lo, hi) = if edge < o { (edge, o) } else { (o, edge) };
                        branches.push(Branch { lo, hi, sign, wraps: (partial_hi - f_min) / TAU, full: false });
                    }
                }
            }
        }
        branches.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        BranchPartition {
            domain: Domain::Arc { lo: v_lo, hi: v_hi },
            critical_points: crit,
            critical_values: cvals,
            branches,
            truncated,
        }
    }
}
