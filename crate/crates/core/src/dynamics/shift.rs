//! Full-shift certification for the partial (escape) regime.

use std::f64::consts::TAU;

use crate::retmap::{Branch, Domain, ReducedMap};

/// Required lower bound on |f′| along certified branches.
pub const MIN_EXPANSION: f64 = 3.0;
/// Critical values must sit this fraction of |U| away from ∂U.
pub const FOLD_DEPTH: f64 = 0.01;
/// Half-slope |dX/dθ| of the horizontal cone used in the 2-D checks.
pub const STRIP_CONE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftStatus {
    Pass,
    Fail,
    /// No escape set (ρ ≥ c, or c = 0): nothing folds away.
    NotApplicable,
}

#[derive(Debug, Clone, Copy)]
pub struct ShiftOptions {
    pub w_max: usize,
    pub samples_per_branch: usize,
    /// Number of X-slices for the 2-D checks.
    pub x_slices: usize,
    /// Slices cover [−r, r]; None uses the forward-invariant band [0, X*] instead.
    pub x_range: Option<f64>,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions { w_max: 20, samples_per_branch: 32, x_slices: 5, x_range: None }
    }
}

impl ShiftOptions {
    /// Same check with `m` times denser sampling.
    pub fn refined(&self, m: usize) -> Self {
        ShiftOptions { samples_per_branch: self.samples_per_branch * m, x_slices: (self.x_slices - 1) * m + 1, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftReport {
    pub status: ShiftStatus,
    /// Branches covering a whole copy of V.
    pub branches: usize,
    pub partial_branches: usize,
    pub truncated: bool,
    /// Signed depth of the critical values inside U beyond FOLD_DEPTH·|U| (radians).
    pub fold_margin: f64,
    pub expansion_min: f64,
    /// expansion_min − MIN_EXPANSION over the 1-D map and all X-slices.
    pub expansion_margin: f64,
    /// Worst fold margin over the X-slices.
    pub slice_fold_margin: f64,
    /// min |J11 + J12 s| over |s| ≤ STRIP_CONE on the strips.
    pub horizontal_expansion: f64,
    /// max slope of the image of the horizontal cone edges (≤ STRIP_CONE when invariant).
    pub cone_slope: f64,
    /// sup |∂X₁/∂X| over the strips.
    pub vertical_contraction: f64,
    /// b·sup F^{α/β−1}·(α/β) over the strips.
    pub vertical_bound: f64,
}

impl ShiftReport {
    fn not_applicable() -> Self {
        ShiftReport {
            status: ShiftStatus::NotApplicable,
            branches: 0,
            partial_branches: 0,
            truncated: false,
            fold_margin: f64::NAN,
            expansion_min: f64::NAN,
            expansion_margin: f64::NAN,
            slice_fold_margin: f64::NAN,
            horizontal_expansion: f64::NAN,
            cone_slope: f64::NAN,
            vertical_contraction: f64::NAN,
            vertical_bound: f64::NAN,
        }
    }
}

struct Slice {
    fold_margin: f64,
    expansion_min: f64,
    full: Vec<Branch>,
    partial: usize,
    truncated: bool,
}

/// Smallest X* ≥ 0 with X* = b (ρ + c + k X*)^{α/β}: every image point has
/// 0 ≤ X₁ ≤ X*, so the invariant set of the map lies in the band [0, X*].
pub fn invariant_band(m: &ReducedMap) -> Option<f64> {
    let mut x = 0.0f64;
    for _ in 0..10_000 {
        let next = m.b * (m.rho + m.c + m.k * x).powf(m.alpha_beta);
        if !next.is_finite() || next > 1e6 {
            return None;
        }
        if (next - x).abs() <= 1e-15 * next.max(1e-300) {
            return Some(next);
        }
        x = next;
    }
    None
}

fn fold_margin(m: &ReducedMap, values: &[f64]) -> f64 {
    let Some((u_lo, u_hi)) = m.escape_interval() else { return f64::NEG_INFINITY };
    let width = u_hi - u_lo;
    values
        .iter()
        .map(|&v| {
            let u = u_lo + (v - u_lo).rem_euclid(TAU);
            if u < u_hi {
                (u - u_lo).min(u_hi - u) - FOLD_DEPTH * width
            } else {
                -(u - u_hi).min(u_lo + TAU - u)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn samples(b: &Branch, n: usize) -> impl Iterator<Item = f64> + '_ {
    (0..=n).map(move |i| b.lo + (b.hi - b.lo) * i as f64 / n as f64)
}

fn slice(m: &ReducedMap, o: &ShiftOptions) -> Option<Slice> {
    if !matches!(m.domain(), Domain::Arc { .. }) {
        return None;
    }
    let p = m.branch_partition(o.w_max);
    let fold = if p.critical_values.is_empty() { f64::NEG_INFINITY } else { fold_margin(m, &p.critical_values) };
    let full: Vec<Branch> = p.branches.iter().filter(|b| b.full).copied().collect();
    let expansion_min = full
        .iter()
        .flat_map(|b| samples(b, o.samples_per_branch))
        .map(|t| m.derivative_1d(t).abs())
        .fold(f64::INFINITY, f64::min);
    Some(Slice {
        fold_margin: fold,
        expansion_min,
        partial: p.branches.len() - full.len(),
        full,
        truncated: p.truncated,
    })
}

/// Certifies that every branch of the 1-D reduction (and of each X-slice of the
/// 2-D map, where F = ρ + kX + c sin θ) stretches across V with |f′| ≥ 3 while
/// the folds land deep inside U.
pub fn verify_full_shift(map: &ReducedMap, o: &ShiftOptions) -> ShiftReport {
    let Some(base) = slice(map, o) else { return ShiftReport::not_applicable() };
    if map.c == 0.0 {
        return ShiftReport::not_applicable();
    }
    let mut slice_fold = base.fold_margin;
    let mut exp_min = base.expansion_min;
    let mut horiz = f64::INFINITY;
    let mut slope = 0.0f64;
    let mut vert = 0.0f64;
    let mut bound = 0.0f64;
    let mut slices_ok = true;
    let r = map.alpha_beta;
    let (x_lo, x_hi) = match o.x_range {
        Some(r) => (-r, r),
        None => match invariant_band(map) {
            Some(x) => (0.0, x),
            None => (-1.0, 1.0),
        },
    };
    for i in 0..o.x_slices {
        let x = if o.x_slices == 1 { x_lo } else { x_lo + (x_hi - x_lo) * i as f64 / (o.x_slices - 1) as f64 };
        let shifted = ReducedMap { rho: map.rho + map.k * x, ..*map };
        let Some(s) = slice(&shifted, o) else {
            slices_ok = false;
            continue;
        };
        slice_fold = slice_fold.min(s.fold_margin);
        exp_min = exp_min.min(s.expansion_min);
        if s.full.len() != base.full.len() || s.partial > 0 {
            slices_ok = false;
        }
        for b in &s.full {
            for t in samples(b, o.samples_per_branch) {
                let Ok(j) = map.jacobian(t, x) else { continue };
                for sl in [-STRIP_CONE, 0.0, STRIP_CONE] {
                    let (u0, u1) = (j[0][0] + j[0][1] * sl, j[1][0] + j[1][1] * sl);
                    horiz = horiz.min(u0.abs());
                    slope = slope.max((u1 / u0).abs());
                }
                vert = vert.max(j[1][1].abs());
                bound = bound.max(map.b * map.f_value(t, x).powf(r - 1.0) * r);
            }
        }
    }
    let expansion_margin = exp_min - MIN_EXPANSION;
    let pass = base.full.len() >= 2
        && base.partial == 0
        && slices_ok
        && base.fold_margin > 0.0
        && slice_fold > 0.0
        && expansion_margin >= 0.0
        && horiz >= MIN_EXPANSION
        && slope <= STRIP_CONE
        && vert <= bound * (1.0 + 1e-12);
    ShiftReport {
        status: if pass { ShiftStatus::Pass } else { ShiftStatus::Fail },
        branches: base.full.len(),
        partial_branches: base.partial,
        truncated: base.truncated,
        fold_margin: base.fold_margin,
        expansion_min: exp_min,
        expansion_margin,
        slice_fold_margin: slice_fold,
        horizontal_expansion: horiz,
        cone_slope: slope,
        vertical_contraction: vert,
        vertical_bound: bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn base() -> ReducedMap {
        ReducedMap::new(0.0, 1e-4, 1.0, 0.01, 0.5, 10.0, 1.1)
    }

    // a that puts the fold's critical value at the given fraction across U
    fn tuned(frac: f64) -> ReducedMap {
        let m = base();
        let tc = m.critical_points()[0];
        let fc = m.lift_1d(tc).unwrap() - m.a;
        let (u_lo, u_hi) = m.escape_interval().unwrap();
        m.with_a(u_lo + frac * (u_hi - u_lo) - fc)
    }

    #[test]
    fn vacuous_without_escape() {
        let m = ReducedMap::new(0.0, 1e-4, 0.0, 0.01, 0.5, 10.0, 1.1);
        assert_eq!(verify_full_shift(&m, &ShiftOptions::default()).status, ShiftStatus::NotApplicable);
        let total = ReducedMap::new(0.0, 1e-4, 1.0, 0.01, 1.5, 10.0, 1.1);
        assert_eq!(verify_full_shift(&total, &ShiftOptions::default()).status, ShiftStatus::NotApplicable);
    }

    #[test]
    fn fold_mid_escape_passes() {
        let r = verify_full_shift(&tuned(0.5), &ShiftOptions::default());
        assert_eq!(r.status, ShiftStatus::Pass, "{r:?}");
        assert!(r.fold_margin > 0.0 && r.expansion_margin > 0.0);
        assert!(r.branches >= 2);
        let fine = verify_full_shift(&tuned(0.5), &ShiftOptions::default().refined(10));
        assert_eq!(fine.status, ShiftStatus::Pass);
        assert!(fine.expansion_margin > 0.0 && fine.fold_margin > 0.0);
    }

    #[test]
    fn band_is_a_fixed_point() {
        let m = base();
        let x = invariant_band(&m).unwrap();
        assert!((x - m.b * (m.rho + m.c + m.k * x).powf(m.alpha_beta)).abs() < 1e-15);
        assert!(invariant_band(&ReducedMap { b: 50.0, k: 1.0, ..m }).is_none());
    }

    #[test]
    fn fold_inside_v_fails() {
        let m = tuned(0.5).with_a(tuned(0.5).a + PI);
        let r = verify_full_shift(&m, &ShiftOptions::default());
        assert_eq!(r.status, ShiftStatus::Fail);
        assert!(r.fold_margin < 0.0);
    }
}
