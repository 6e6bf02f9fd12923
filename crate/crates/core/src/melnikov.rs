//! Weights and integrals along the loop: E, K, H₁, H₂, the drift A and the
//! oscillatory pair C(ω), S(ω), their window-truncated versions, and the
//! constants a, b, c, k of the reduced return map.

use std::f64::consts::{PI, SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::homoclinic::{ball_window, section_window, HomoclinicProfile, Window};
use crate::model::{nonlinear_coeffs, SystemParams};
use crate::numerics::quad;
use crate::retmap::ReducedMap;

/// E(s) of the conservative loop; odd in s.
pub fn e_of_s(s: f64) -> f64 {
    let w = (-2.0 * s.abs()).exp();
    // (e^{2t}−3)² and (e^{−2t}−3)² after dividing by e^{4|t|}
    let big = (1.0 - 3.0 * w).powi(2);
    let small = (w * w - 3.0 * w).powi(2);
    let ratio = -(small - big) / (small + big);
    let sech2 = 4.0 * w / (1.0 + w).powi(2);
    let v = ratio * (1.0 - 3.0 * sech2);
    if s >= 0.0 {
        v
    } else {
        -v
    }
}

/// K(s) = −∫₀ˢ E = ½ ln[8 e^{2s}((1−3e^{2s})² + e^{4s}(e^{2s}−3)²)/(e^{2s}+1)⁶], even in s.
pub fn k_of_s(s: f64) -> f64 {
    // with w = e^{−2|s|} the argument is 8w((1−3w)² + w²(w−3)²)/(1+w)⁶
    let a = s.abs();
    let w = (-2.0 * a).exp();
    let p = (1.0 - 3.0 * w).powi(2) + w * w * (w - 3.0).powi(2);
    0.5 * (8f64.ln() - 2.0 * a + p.ln() - 6.0 * w.ln_1p())
}

/// Scale applied to H₁, H₂. `Physical` is the eigen-chart normalization of the
/// coefficient functions; `Symmetric` doubles it so that at λ = 0 the integrands
/// are exactly (u+v)(a+b)²(b−a) and (u+v)(a+b)².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Physical,
    Symmetric,
}

impl Normalization {
    pub fn scale(self) -> f64 {
        match self {
            Normalization::Physical => 1.0,
            Normalization::Symmetric => 2.0,
        }
    }
}

/// (H₁, H₂) = (vA − uB, vC − uD) at ℓ(s), physical normalization.
pub fn h_functions(p: &dyn HomoclinicProfile, s: f64) -> (f64, f64) {
    let [x, y] = p.state(s);
    let [u, v] = p.tangent(s);
    let c = nonlinear_coeffs(x, y, p.alpha(), p.gamma_lambda());
    (v * c.a - u * c.b, v * c.c - u * c.d)
}

fn span(p: &dyn HomoclinicProfile, w: Option<Window>) -> (f64, f64) {
    match w {
        Some(w) => (-w.s_minus, w.s_plus),
        None => p.s_range(),
    }
}

/// A = ∫ H₁ e^{K} over the whole loop.
pub fn compute_a(p: &dyn HomoclinicProfile, norm: Normalization, tol: f64) -> Result<f64> {
    drift(p, None, norm, tol)
}

fn drift(p: &dyn HomoclinicProfile, w: Option<Window>, norm: Normalization, tol: f64) -> Result<f64> {
    let (lo, hi) = span(p, w);
    let k = norm.scale();
    quad(|s| k * h_functions(p, s).0 * p.k(s).exp(), lo, hi, tol)
}

fn oscillatory(
    p: &dyn HomoclinicProfile,
    w: Option<Window>,
    omega: f64,
    norm: Normalization,
    tol: f64,
) -> Result<(f64, f64)> {
    let (lo, hi) = span(p, w);
    let k = norm.scale();
    let base = |s: f64| k * h_functions(p, s).1 * p.k(s).exp();
    let c = quad(|s| base(s) * (omega * s).cos(), lo, hi, tol)?;
    let s = quad(|s| base(s) * (omega * s).sin(), lo, hi, tol)?;
    Ok((c, s))
}

/// Which closed-form candidate a quadrature value agrees with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Match {
    Stated,
    Residue,
    Both,
    Neither,
}

impl Match {
    fn of(value: f64, stated: f64, residue: f64, rel: f64) -> Match {
        let close = |c: f64| (value - c).abs() <= rel * c.abs().max(f64::MIN_POSITIVE);
        match (close(stated), close(residue)) {
            (true, true) => Match::Both,
            (true, false) => Match::Stated,
            (false, true) => Match::Residue,
            (false, false) => Match::Neither,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Match::Stated => "stated",
            Match::Residue => "residue",
            Match::Both => "both",
            Match::Neither => "neither",
        }
    }
}

/// Closed-form candidates for the conservative loop in the symmetric normalization.
/// The stated S lacks the factor π that the residue evaluation produces; the two
/// C candidates coincide.
pub fn closed_form_candidates(omega: f64) -> [(f64, f64); 2] {
    let den = (-0.5 * omega * PI).exp() + (0.5 * omega * PI).exp();
    let c = 16.0 * SQRT_2 * PI / den;
    let s_stated = -(2.0 * SQRT_2 / 3.0) * omega * (1.0 + omega * omega) / den;
    [(c, s_stated), (c, s_stated * PI)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsReport {
    pub omega: f64,
    /// Quadrature values; these are the ones used downstream.
    pub c: f64,
    pub s: f64,
    pub c_stated: f64,
    pub c_residue: f64,
    pub s_stated: f64,
    pub s_residue: f64,
    pub c_match: Match,
    pub s_match: Match,
}

impl CsReport {
    pub fn agrees(&self) -> bool {
        matches!(self.c_match, Match::Stated | Match::Residue) && matches!(self.s_match, Match::Stated | Match::Residue)
    }
}

/// C(ω), S(ω) by quadrature, alongside both closed-form candidates (matched at rel. 1e-6).
pub fn compute_cs(omega: f64, p: &dyn HomoclinicProfile, norm: Normalization, tol: f64) -> Result<CsReport> {
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega = {omega} must be >= 0")));
    }
    let (c, s) = oscillatory(p, None, omega, norm, tol)?;
    let [(c_stated, s_stated), (c_residue, s_residue)] = closed_form_candidates(omega);
    Ok(CsReport {
        omega,
        c,
        s,
        c_stated,
        c_residue,
        s_stated,
        s_residue,
        c_match: Match::of(c, c_stated, c_residue, 1e-6),
        s_match: Match::of(s, s_stated, s_residue, 1e-6),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteL {
    pub window: Window,
    pub a_l: f64,
    pub c_l: f64,
    pub s_l: f64,
    /// √(C_L² + S_L²)
    pub amplitude: f64,
    /// Phase with tan c₀ = S_L / C_L.
    pub c0: f64,
    pub p_l: f64,
    pub p_l_plus: f64,
}

/// Window-truncated integrals and exponential weights.
pub fn finite_l_constants(
    p: &dyn HomoclinicProfile,
    window: Window,
    omega: f64,
    norm: Normalization,
    tol: f64,
) -> Result<FiniteL> {
    let a_l = drift(p, Some(window), norm, tol)?;
    let (c_l, s_l) = oscillatory(p, Some(window), omega, norm, tol)?;
    let (p_l, p_l_plus) = weights(p, window);
    Ok(FiniteL { window, a_l, c_l, s_l, amplitude: c_l.hypot(s_l), c0: s_l.atan2(c_l), p_l, p_l_plus })
}

fn weights(p: &dyn HomoclinicProfile, w: Window) -> (f64, f64) {
    let kp = p.k(w.s_plus);
    let km = p.k(-w.s_minus);
    ((km - kp).exp(), (-kp).exp())
}

/// Which window the truncated integrals use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// Entry times into the ball of radius ε/2.
    Ball,
    /// Crossing times of the sections {y = ε} and {x = ε}.
    Section,
}

impl WindowKind {
    pub fn resolve(self, p: &dyn HomoclinicProfile, epsilon: f64) -> Result<Window> {
        match self {
            WindowKind::Ball => ball_window(p, epsilon),
            WindowKind::Section => section_window(p, epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantsOptions {
    pub normalization: Normalization,
    pub window: WindowKind,
    pub tol: f64,
}

impl Default for ConstantsOptions {
    fn default() -> Self {
        ConstantsOptions { normalization: Normalization::Physical, window: WindowKind::Section, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovConstants {
    pub normalization: Normalization,
    pub lambda: f64,
    pub gamma_lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub rho: f64,
    pub a_full: f64,
    pub c_omega: f64,
    pub s_omega: f64,
    pub finite: FiniteL,
    /// Phase constant before reduction mod 2π.
    pub a_unreduced: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
}

impl MelnikovConstants {
    pub fn reduced_map(&self) -> ReducedMap {
        ReducedMap::new(
            self.a_unreduced,
            self.b,
            self.c,
            self.k,
            self.rho,
            self.omega / self.beta,
            self.alpha / self.beta,
        )
    }

    /// c computed from the untruncated integrals.
    pub fn c_full(&self) -> f64 {
        self.c_omega.hypot(self.s_omega) / self.a_full
    }
}

/// Caches the ω-independent pieces (A, A_L, P_L, P_L⁺) for one loop and ε.
pub struct MelnikovCalculator<'a> {
    profile: &'a dyn HomoclinicProfile,
    lambda: f64,
    epsilon: f64,
    opts: ConstantsOptions,
    window: Window,
    a_full: f64,
    a_l: f64,
    p_l: f64,
    p_l_plus: f64,
}

impl<'a> MelnikovCalculator<'a> {
    pub fn new(profile: &'a dyn HomoclinicProfile, lambda: f64, epsilon: f64, opts: ConstantsOptions) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be > 0")));
        }
        let window = opts.window.resolve(profile, epsilon)?;
        let a_full = compute_a(profile, opts.normalization, opts.tol)?;
        let a_l = drift(profile, Some(window), opts.normalization, opts.tol)?;
        if !(a_l > 0.0) {
            return Err(Error::NonPositiveDrift(a_l));
        }
        let (p_l, p_l_plus) = weights(profile, window);
        Ok(MelnikovCalculator { profile, lambda, epsilon, opts, window, a_full, a_l, p_l, p_l_plus })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn a_full(&self) -> f64 {
        self.a_full
    }

    /// √(C²+S²)/A_L with the truncated pair, i.e. the map constant c at ω.
    pub fn c_at(&self, omega: f64) -> Result<f64> {
        let (c_l, s_l) = oscillatory(self.profile, Some(self.window), omega, self.opts.normalization, self.opts.tol)?;
        Ok(c_l.hypot(s_l) / self.a_l)
    }

    /// √(C(ω)²+S(ω)²)/A with the untruncated integrals.
    pub fn c_full_at(&self, omega: f64) -> Result<f64> {
        let (c, s) = oscillatory(self.profile, None, omega, self.opts.normalization, self.opts.tol)?;
        Ok(c.hypot(s) / self.a_full)
    }

    pub fn constants(&self, omega: f64, mu: f64, rho: f64) -> Result<MelnikovConstants> {
        let p = self.profile;
        let (alpha, beta) = (p.alpha(), p.beta());
        let norm = self.opts.normalization;
        let (c_omega, s_omega) = oscillatory(p, None, omega, norm, self.opts.tol)?;
        let (c_l, s_l) = oscillatory(p, Some(self.window), omega, norm, self.opts.tol)?;
        let finite = FiniteL {
            window: self.window,
            a_l: self.a_l,
            c_l,
            s_l,
            amplitude: c_l.hypot(s_l),
            c0: s_l.atan2(c_l),
            p_l: self.p_l,
            p_l_plus: self.p_l_plus,
        };
        let eps = self.epsilon;
        let w = self.window;
        let r = alpha / beta;
        let pa = self.p_l_plus * self.a_l;
        // passage time near the saddle is (1/β) ln(ε / (μ P_L⁺ A_L F))
        let a_unreduced = if mu > 0.0 {
            (omega / beta) * (1.0 / mu).ln() + omega * (w.s_plus + w.s_minus) + (omega / beta) * (eps / pa).ln()
        } else {
            f64::INFINITY
        };
        let b = (mu / eps).powf(r - 1.0) * pa.powf(r);
        Ok(MelnikovConstants {
            normalization: norm,
            lambda: self.lambda,
            gamma_lambda: p.gamma_lambda(),
            alpha,
            beta,
            omega,
            epsilon: eps,
            mu,
            rho,
            a_full: self.a_full,
            c_omega,
            s_omega,
            finite,
            a_unreduced,
            a: if a_unreduced.is_finite() { a_unreduced.rem_euclid(TAU) } else { f64::NAN },
            b,
            c: finite.amplitude / self.a_l,
            k: self.p_l / pa,
        })
    }
}

/// All constants for one parameter point.
pub fn map_constants(
    par: &SystemParams,
    p: &dyn HomoclinicProfile,
    opts: ConstantsOptions,
) -> Result<MelnikovConstants> {
    if (par.alpha - p.alpha()).abs() > 1e-12 {
        return Err(Error::InvalidParameter("profile was computed for a different lambda".into()));
    }
    MelnikovCalculator::new(p, par.lambda, par.epsilon, opts)?.constants(par.omega, par.mu, par.rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homoclinic::{sample_orbit, shoot_gamma, ClosedFormLoop, HomoclinicData};
    use crate::model::unperturbed_orbit;

    fn loop_data() -> HomoclinicData {
        let g = shoot_gamma(0.05, 1e-12).unwrap();
        sample_orbit(0.05, g, 0.05, 5e-3).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(e_of_s(0.0), 0.0);
        for k in 1..100 {
            let s = 0.1 * k as f64;
            assert!((e_of_s(s) + e_of_s(-s)).abs() < 1e-12);
            assert!((k_of_s(s) - k_of_s(-s)).abs() < 1e-12);
        }
        assert!(k_of_s(0.0).abs() < 1e-15);
        assert!((k_of_s(1.0) + 0.685).abs() < 1e-3);
        assert!(k_of_s(400.0).is_finite());
    }

    #[test]
    fn k_derivative_is_minus_e() {
        for k in -50..=50 {
            let s = 0.1 * k as f64 + 0.013;
            let h = 1e-5;
            let fd = (k_of_s(s + h) - k_of_s(s - h)) / (2.0 * h);
            let e = e_of_s(s);
            assert!((fd + e).abs() <= 1e-6 * e.abs().max(1e-3), "s = {s}");
        }
    }

    #[test]
    fn h_at_zero_damping() {
        let p = ClosedFormLoop;
        for k in -30..=30 {
            let s = 0.2 * k as f64;
            let [a, b] = unperturbed_orbit(s).coords;
            let [u, v] = p.tangent(s);
            let (h1, h2) = h_functions(&p, s);
            let base = (u + v) * (a + b).powi(2);
            assert!((h2 - 0.5 * base).abs() < 1e-14);
            assert!((h1 - 0.5 * base * (b - a)).abs() < 1e-14);
        }
        assert!(h_functions(&p, 0.0).1.abs() < 1e-15);
        let (h1, h2) = h_functions(&p, 40.0);
        assert!(h1.abs() < 1e-30 && h2.abs() < 1e-30);
    }

    #[test]
    fn drift_at_zero_damping() {
        let a = compute_a(&ClosedFormLoop, Normalization::Symmetric, 1e-12).unwrap();
        assert!((a - 16.0 / 15.0).abs() < 1e-9, "{a}");
        let a1 = compute_a(&ClosedFormLoop, Normalization::Physical, 1e-12).unwrap();
        assert!((a1 - 8.0 / 15.0).abs() < 1e-9);
    }

    #[test]
    fn drift_with_damping() {
        let d = loop_data();
        let a = compute_a(&d, Normalization::Symmetric, 1e-10).unwrap();
        assert!(a > 1.0 && (a / (16.0 / 15.0) - 1.0).abs() < 0.25, "{a}");
    }

    #[test]
    fn oscillatory_pair_at_zero_damping() {
        let r = compute_cs(1.0, &ClosedFormLoop, Normalization::Symmetric, 1e-12).unwrap();
        // the cosine integrand is odd
        assert!(r.c.abs() < 1e-10);
        assert_eq!(r.s_match, Match::Residue);
        let r0 = compute_cs(0.0, &ClosedFormLoop, Normalization::Symmetric, 1e-12).unwrap();
        assert!(r0.s.abs() < 1e-12);
        assert!((r0.c_stated - 8.0 * SQRT_2 * PI).abs() < 1e-12);
        let r2 = compute_cs(2.0, &ClosedFormLoop, Normalization::Symmetric, 1e-12).unwrap();
        assert!((r2.c_stated - 3.066).abs() < 1e-3);
    }

    #[test]
    fn amplitude_lower_bound() {
        for k in 1..=20 {
            let w = 0.5 * k as f64;
            let r = compute_cs(w, &ClosedFormLoop, Normalization::Symmetric, 1e-12).unwrap();
            let bound = 1.0 / ((-0.5 * w * PI).exp() + (0.5 * w * PI).exp());
            // fails for small ω: the amplitude is |S| only, which vanishes like ω
            if w >= 0.5 {
                assert!(r.c.hypot(r.s) > bound, "omega = {w}");
            }
        }
    }

    #[test]
    fn truncation_converges() {
        let p = ClosedFormLoop;
        let a = compute_a(&p, Normalization::Symmetric, 1e-12).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025, 0.0125] {
            let w = ball_window(&p, eps).unwrap();
            let f = finite_l_constants(&p, w, 1.0, Normalization::Symmetric, 1e-12).unwrap();
            let err = (f.a_l - a).abs();
            assert!(err < prev);
            prev = err;
            assert!((f.p_l - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn weights_and_scalings() {
        let d = loop_data();
        let w = ball_window(&d, 0.05).unwrap();
        let f = finite_l_constants(&d, w, 1.0, Normalization::Symmetric, 1e-10).unwrap();
        assert!(f.p_l < 1.0 && 1.0 < f.p_l_plus);
        let mut pts = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let w = ball_window(&d, eps).unwrap();
            let f = finite_l_constants(&d, w, 1.0, Normalization::Symmetric, 1e-10).unwrap();
            pts.push((eps.ln(), f.p_l_plus.ln(), f.p_l.ln()));
        }
        let run = pts[2].0 - pts[0].0;
        let slope_plus = (pts[2].1 - pts[0].1) / run;
        let slope_l = (pts[2].2 - pts[0].2) / run;
        let want_plus = -d.beta / d.alpha;
        assert!((slope_plus / want_plus - 1.0).abs() < 0.2, "{slope_plus}");
        let want = d.alpha / d.beta - d.beta / d.alpha;
        assert!((slope_l / want - 1.0).abs() < 0.2, "{slope_l} vs {want}");
    }

    #[test]
    fn constants_follow_mu() {
        let d = loop_data();
        let par = SystemParams::new(0.05, d.gamma_lambda, 0.5, 1e-4, 1.0, 0.05).unwrap();
        let m1 = map_constants(&par, &d, ConstantsOptions::default()).unwrap();
        let par2 = SystemParams { mu: 0.5e-4, ..par };
        let m2 = map_constants(&par2, &d, ConstantsOptions::default()).unwrap();
        let da = m2.a_unreduced - m1.a_unreduced;
        assert!((da - 2f64.ln() / d.beta).abs() < 1e-9);
        let r = d.alpha / d.beta;
        assert!((m2.b / m1.b - 2f64.powf(1.0 - r)).abs() < 1e-12);
        assert!(m1.c > 0.0 && m1.a_full > 0.5);
    }

    #[test]
    fn c_is_scale_free() {
        let d = loop_data();
        let par = SystemParams::new(0.05, d.gamma_lambda, 0.5, 1e-4, 1.0, 0.05).unwrap();
        let o1 = ConstantsOptions { normalization: Normalization::Symmetric, ..Default::default() };
        let a = map_constants(&par, &d, o1).unwrap();
        let b = map_constants(&par, &d, ConstantsOptions::default()).unwrap();
        assert!((a.c / b.c - 1.0).abs() < 1e-9, "{} {}", a.c, b.c);
    }

    #[test]
    fn shear_scales_like_eps_power() {
        let d = loop_data();
        let mut pts = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let par = SystemParams::new(0.05, d.gamma_lambda, 0.5, 1e-6, 1.0, eps).unwrap();
            let m = map_constants(&par, &d, ConstantsOptions::default()).unwrap();
            pts.push((eps.ln(), m.k.ln()));
        }
        let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
        let want = d.alpha / d.beta;
        assert!((slope / want - 1.0).abs() < 0.2, "{slope} vs {want}");
    }
}
