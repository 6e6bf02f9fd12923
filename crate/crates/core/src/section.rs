//! Direct first-return map to Σ⁻ = {y = ε} by integrating the forced system,
//! for cross-checking the reduced map.
//!
//! Points of Σ⁻ are written (θ, 𝕏) with x = x_ℓ(−s⁻) + μ𝕏, y = ε, where
//! x_ℓ(−s⁻) is where the loop itself meets Σ⁻. The ODE is run with
//! γ = γ_λ − μρ; the reduced map's angle is the clock θ shifted by ωs⁻ + c₀ + π.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homoclinic::{section_window, HomoclinicData, HomoclinicProfile, Window};
use crate::melnikov::{ConstantsOptions, MelnikovCalculator, MelnikovConstants, Normalization, WindowKind};
use crate::model::{vector_field_autonomous, SystemParams};
use crate::numerics::{Direction, Dopri5, Event};
use crate::retmap::{MapOutcome, ReducedMap};

/// Height of Σ⁺ in scaled units.
pub const K1: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct SectionSpec {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub window: Window,
    /// x of the loop on Σ⁻.
    pub x_offset: f64,
    /// y of the loop on Σ⁺.
    pub y_offset: f64,
    pub k1: f64,
    /// |ẏ|/‖f‖ on Σ⁻ and |ẋ|/‖f‖ on Σ⁺ at the loop's crossings.
    pub transversality: (f64, f64),
    pub tol: f64,
    pub box_size: f64,
    pub t_max: f64,
    profile: HomoclinicData,
}

impl SectionSpec {
    pub fn new(profile: HomoclinicData, epsilon: f64) -> Result<Self> {
        let window = section_window(&profile, epsilon)?;
        let lm = profile.state(-window.s_minus);
        let lp = profile.state(window.s_plus);
        let (alpha, beta) = (profile.alpha(), profile.beta());
        let ratio = |xy: [f64; 2], comp: usize| {
            let q = xy[0] + alpha * xy[1];
            let p = -alpha * xy[0] + xy[1];
            let v = to_eigen(vector_field_autonomous(q, p, profile.lambda, profile.gamma_lambda()), alpha);
            v[comp].abs() / v[0].hypot(v[1])
        };
        let transversality = (ratio(lm, 1), ratio(lp, 0));
        if transversality.0 < 0.1 || transversality.1 < 0.1 {
            return Err(Error::InvalidParameter(format!("sections not transversal: {transversality:?}")));
        }
        Ok(SectionSpec {
            epsilon,
            alpha,
            beta,
            window,
            x_offset: lm[0],
            y_offset: lp[1],
            k1: K1,
            transversality,
            tol: 1e-11,
            box_size: 10.0,
            t_max: 200.0,
            profile,
        })
    }

    pub fn profile(&self) -> &HomoclinicData {
        &self.profile
    }

    /// Constants of the reduced map matched to these sections.
    pub fn constants(&self, par: &SystemParams) -> Result<MelnikovConstants> {
        let opts = ConstantsOptions { normalization: Normalization::Physical, window: WindowKind::Section, tol: 1e-10 };
        MelnikovCalculator::new(&self.profile, par.lambda, self.epsilon, opts)?.constants(par.omega, par.mu, par.rho)
    }

    /// Clock angle on Σ⁻ → angle of the reduced map.
    pub fn angle_offset(&self, mc: &MelnikovConstants) -> f64 {
        mc.omega * self.window.s_minus + mc.finite.c0 + PI
    }
}

fn to_eigen(v: [f64; 2], alpha: f64) -> [f64; 2] {
    let n = 1.0 + alpha * alpha;
    [(v[0] - alpha * v[1]) / n, (alpha * v[0] + v[1]) / n]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionReturn {
    /// Clock angle θ₁ mod 2π and scaled 𝕏₁; Escape carries F = NaN.
    pub outcome: MapOutcome,
    /// Σ⁻ → Σ⁺ along the loop.
    pub outer_time: f64,
    /// Σ⁺ → Σ⁻ past the saddle.
    pub inner_time: f64,
    /// Scaled y on Σ⁺, (y − y_ℓ(s⁺))/μ.
    pub y_plus_scaled: f64,
    /// |y_plus_scaled| > K₁.
    pub k1_exceeded: bool,
}

/// First return of (θ, 𝕏) ∈ Σ⁻ through Σ⁺.
pub fn numeric_return(par: &SystemParams, spec: &SectionSpec, theta: f64, x_scaled: f64) -> Result<SectionReturn> {
    if !(par.mu > 0.0) {
        return Err(Error::InvalidParameter("mu must be > 0: the sections have zero width at mu = 0".into()));
    }
    if (par.alpha - spec.alpha).abs() > 1e-12 {
        return Err(Error::InvalidParameter("sections were set up for a different lambda".into()));
    }
    let (al, eps, mu) = (spec.alpha, spec.epsilon, par.mu);
    let gamma = spec.profile.gamma_lambda() - mu * par.rho;
    let (lambda, omega) = (par.lambda, par.omega);
    let field = move |_: f64, z: &[f64; 3]| {
        let [dq, dp] = vector_field_autonomous(z[0], z[1], lambda, gamma);
        [dq, dp + mu * z[0] * z[0] * z[2].sin(), omega]
    };
    let n = 1.0 + al * al;
    let x_of = move |z: &[f64; 3]| (z[0] - al * z[1]) / n;
    let y_of = move |z: &[f64; 3]| (al * z[0] + z[1]) / n;
    let bx = spec.box_size;
    let inside = move |z: &[f64; 3]| bx - z[0].abs().max(z[1].abs());
    let solver = Dopri5::new(spec.tol)?;

    let x0 = spec.x_offset + mu * x_scaled;
    let z0 = [x0 + al * eps, -al * x0 + eps, theta];
    let escape = |t: f64| MapOutcome::Escape { theta: t, f: f64::NAN };

    let sig_plus = move |z: &[f64; 3]| x_of(z) - eps;
    let leg1 =
        [Event { g: &sig_plus, direction: Direction::Falling }, Event { g: &inside, direction: Direction::Falling }];
    let h1 = solver.first_event(field, 0.0, z0, spec.t_max, &leg1).map_err(|e| match e {
        Error::NoCrossing { .. } => Error::SectionMiss(format!("no crossing of x = {eps} within t = {}", spec.t_max)),
        e => e,
    })?;
    if h1.index == 1 {
        return Ok(SectionReturn {
            outcome: escape(theta),
            outer_time: h1.event.t,
            inner_time: f64::NAN,
            y_plus_scaled: f64::NAN,
            k1_exceeded: false,
        });
    }
    let z1 = h1.event.state;
    let y_plus_scaled = (y_of(&z1) - spec.y_offset) / mu;
    let k1_exceeded = y_plus_scaled.abs() > spec.k1;

    let back = move |z: &[f64; 3]| y_of(z) - eps;
    let other = move |z: &[f64; 3]| y_of(z) + eps;
    let leg2 = [
        Event { g: &back, direction: Direction::Rising },
        Event { g: &other, direction: Direction::Falling },
        Event { g: &inside, direction: Direction::Falling },
    ];
    let h2 = match solver.first_event(field, 0.0, z1, spec.t_max, &leg2) {
        Ok(h) => h,
        // stuck at the saddle for the whole budget: counts as not returning
        Err(Error::NoCrossing { .. }) => {
            return Ok(SectionReturn {
                outcome: escape(theta),
                outer_time: h1.event.t,
                inner_time: f64::INFINITY,
                y_plus_scaled,
                k1_exceeded,
            })
        }
        Err(e) => return Err(e),
    };
    let outcome = if h2.index == 0 {
        let z2 = h2.event.state;
        let x1 = (x_of(&z2) - spec.x_offset) / mu;
        let t1 = z2[2].rem_euclid(TAU);
        if x1.abs() > 1.0 {
            MapOutcome::RangeExit { theta: t1, x: x1 }
        } else {
            MapOutcome::Next { theta: t1, x: x1 }
        }
    } else {
        escape(theta)
    };
    Ok(SectionReturn { outcome, outer_time: h1.event.t, inner_time: h2.event.t, y_plus_scaled, k1_exceeded })
}

/// The reduced map expressed in the clock angle of Σ⁻.
pub fn reduced_return(map: &ReducedMap, offset: f64, theta: f64, x_scaled: f64) -> MapOutcome {
    match map.apply(theta + offset, x_scaled) {
        MapOutcome::Next { theta: t, x } => MapOutcome::Next { theta: (t - offset).rem_euclid(TAU), x },
        MapOutcome::RangeExit { theta: t, x } => MapOutcome::RangeExit { theta: (t - offset).rem_euclid(TAU), x },
        MapOutcome::Escape { f, .. } => MapOutcome::Escape { theta, f },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub samples: usize,
    /// Samples returning under both maps.
    pub both_returned: usize,
    pub theta_err_median: f64,
    pub theta_err_max: f64,
    /// |ln 𝕏₁(numeric) − ln 𝕏₁(reduced)| over returns with 𝕏₁ > 0 in both.
    pub lnx_err_median: f64,
    pub lnx_err_max: f64,
    /// Fraction of samples where both maps agree on escaping or returning.
    pub escape_agreement: f64,
    pub k1_exceeded: usize,
    /// Samples whose integration failed (counted as disagreements).
    pub failures: usize,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Random (θ, 𝕏) ∈ [0, 2π) × [−1, 1]: numeric return against the reduced map.
pub fn compare_reduced(par: &SystemParams, spec: &SectionSpec, samples_n: usize, seed: u64) -> Result<Comparison> {
    if !(par.mu > 0.0) {
        return Err(Error::InvalidParameter("mu must be > 0".into()));
    }
    if samples_n == 0 {
        return Err(Error::InvalidParameter("samples_n must be positive".into()));
    }
    let mc = spec.constants(par)?;
    let map = mc.reduced_map();
    let offset = spec.angle_offset(&mc);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..samples_n).map(|_| (rng.gen_range(0.0..TAU), rng.gen_range(-1.0..1.0))).collect();
    let results: Vec<(MapOutcome, Option<SectionReturn>)> = pts
        .par_iter()
        .map(|&(t, x)| (reduced_return(&map, offset, t, x), numeric_return(par, spec, t, x).ok()))
        .collect();
    let (mut th, mut lx) = (Vec::new(), Vec::new());
    let (mut agree, mut k1, mut failures) = (0usize, 0usize, 0usize);
    for (red, num) in &results {
        let Some(num) = num else {
            failures += 1;
            continue;
        };
        k1 += num.k1_exceeded as usize;
        let (rp, np) = (red.point(), num.outcome.point());
        if rp.is_some() == np.is_some() {
            agree += 1;
        }
        if let (Some(r), Some(n)) = (rp, np) {
            let d = (n.0 - r.0 + PI).rem_euclid(TAU) - PI;
            th.push(d.abs());
            if r.1 > 0.0 && n.1 > 0.0 {
                lx.push((n.1.ln() - r.1.ln()).abs());
            }
        }
    }
    let both = th.len();
    let max = |v: &[f64]| v.iter().copied().fold(f64::NAN, f64::max);
    Ok(Comparison {
        samples: samples_n,
        both_returned: both,
        theta_err_max: max(&th),
        theta_err_median: median(&mut th),
        lnx_err_max: max(&lx),
        lnx_err_median: median(&mut lx),
        escape_agreement: agree as f64 / samples_n as f64,
        k1_exceeded: k1,
        failures,
    })
}
