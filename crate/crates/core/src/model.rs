//! The forced system q'' + (λ − γq²)q' − q + q³ = μq² sin θ, θ' = ω, its
//! coordinate charts, and the closed-form data of the conservative loop.

use std::f64::consts::{SQRT_2, TAU};

use crate::error::{Error, Result};

/// Scalar parameters of the forced system. `gamma()` is γ_λ + μρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub lambda: f64,
    pub gamma_lambda: f64,
    pub rho: f64,
    pub mu: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SystemParams {
    pub fn new(lambda: f64, gamma_lambda: f64, rho: f64, mu: f64, omega: f64, epsilon: f64) -> Result<Self> {
        let (alpha, beta) = eigenvalues(lambda)?;
        for (name, v) in [("gamma_lambda", gamma_lambda), ("rho", rho)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu = {mu} must be >= 0")));
        }
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega = {omega} must be >= 0")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be > 0")));
        }
        Ok(SystemParams { lambda, gamma_lambda, rho, mu, omega, epsilon, alpha, beta })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_lambda + self.mu * self.rho
    }

    /// Soft checks of the intended ordering μ ≪ ε ≪ 1 with moderate ω, ρ.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.epsilon >= 0.5 {
            out.push(format!("epsilon = {} is not small", self.epsilon));
        }
        if self.mu > 0.0 && self.mu >= 0.1 * self.epsilon {
            out.push(format!("mu = {} is not much smaller than epsilon = {}", self.mu, self.epsilon));
        }
        if self.omega > 1e3 {
            out.push(format!("omega = {} is far outside the moderate range", self.omega));
        }
        if self.rho.abs() * self.epsilon > 1.0 {
            out.push(format!("rho = {} is large against 1/epsilon", self.rho));
        }
        out
    }
}

/// Eigenvalues (α, β) of the saddle at the origin: α = (√(λ²+4)+λ)/2, β = (√(λ²+4)−λ)/2.
pub fn eigenvalues(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
    }
    let s = (lambda * lambda + 4.0).sqrt();
    Ok(((s + lambda) / 2.0, (s - lambda) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub q: f64,
    pub p: f64,
    pub theta: f64,
}

impl ExtendedState {
    pub fn new(q: f64, p: f64, theta: f64) -> Self {
        ExtendedState { q, p, theta: theta.rem_euclid(TAU) }
    }
}

/// Which xy chart: `Eigen` is q = x + αy, p = −αx + y (inverse scaled by 1/(1+α²));
/// `Symmetric` is x = (q − p)/2, y = (q + p)/2, the α = 1 chart used for the
/// closed-form loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XyChart {
    Eigen,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Qp,
    Xy(XyChart),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarState {
    pub coords: [f64; 2],
    pub frame: Frame,
}

impl PlanarState {
    pub fn qp(q: f64, p: f64) -> Self {
        PlanarState { coords: [q, p], frame: Frame::Qp }
    }

    pub fn xy(x: f64, y: f64, chart: XyChart) -> Self {
        PlanarState { coords: [x, y], frame: Frame::Xy(chart) }
    }
}

fn to_qp(s: &PlanarState, alpha: f64) -> [f64; 2] {
    let [u, w] = s.coords;
    match s.frame {
        Frame::Qp => [u, w],
        Frame::Xy(XyChart::Eigen) => [u + alpha * w, -alpha * u + w],
        Frame::Xy(XyChart::Symmetric) => [u + w, w - u],
    }
}

fn from_qp(qp: [f64; 2], frame: Frame, alpha: f64) -> [f64; 2] {
    let [q, p] = qp;
    match frame {
        Frame::Qp => qp,
        Frame::Xy(XyChart::Eigen) => {
            let n = 1.0 + alpha * alpha;
            [(q - alpha * p) / n, (alpha * q + p) / n]
        }
        Frame::Xy(XyChart::Symmetric) => [0.5 * (q - p), 0.5 * (q + p)],
    }
}

/// Change of frame. `alpha` is only read by the eigen chart.
pub fn convert(s: &PlanarState, target: Frame, alpha: f64) -> PlanarState {
    if s.frame == target {
        return *s;
    }
    PlanarState { coords: from_qp(to_qp(s, alpha), target, alpha), frame: target }
}

/// Apply the linear part of a chart change to a tangent vector in qp.
pub fn qp_vector_to_eigen(v: [f64; 2], alpha: f64) -> [f64; 2] {
    from_qp(v, Frame::Xy(XyChart::Eigen), alpha)
}

pub fn vector_field_autonomous(q: f64, p: f64, lambda: f64, gamma: f64) -> [f64; 2] {
    [p, -(lambda - gamma * q * q) * p + q - q * q * q]
}

pub fn vector_field_extended(s: &ExtendedState, par: &SystemParams) -> [f64; 3] {
    let [dq, dp] = vector_field_autonomous(s.q, s.p, par.lambda, par.gamma());
    [dq, dp + par.mu * s.q * s.q * s.theta.sin(), par.omega]
}

/// Jacobian of the autonomous field in qp, row-major.
pub fn autonomous_jacobian(q: f64, p: f64, lambda: f64, gamma: f64) -> [[f64; 2]; 2] {
    [[0.0, 1.0], [1.0 - 3.0 * q * q + 2.0 * gamma * q * p, -(lambda - gamma * q * q)]]
}

/// H(q, p) = p²/2 − q²/2 + q⁴/4, conserved when λ = γ = μ = 0.
pub fn energy(q: f64, p: f64) -> f64 {
    0.5 * p * p - 0.5 * q * q + 0.25 * q.powi(4)
}

/// Conservative field in the symmetric chart: (−x + ½(x+y)³, y − ½(x+y)³).
pub fn symmetric_xy_field(x: f64, y: f64) -> [f64; 2] {
    let c = 0.5 * (x + y).powi(3);
    [-x + c, y - c]
}

// e^{2t}/(1+e^{2t}) without overflow.
fn logistic2(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-2.0 * t).exp())
    } else {
        let e = (2.0 * t).exp();
        e / (1.0 + e)
    }
}

/// Closed-form loop (a(t), b(t)) in the symmetric chart, with t = 0 at the apex.
/// Written in e^{−2|t|} so that nothing overflows for any finite t.
pub fn unperturbed_orbit(t: f64) -> PlanarState {
    let k = 2.0 * SQRT_2;
    let (a, b) = if t <= 0.0 {
        let e = t.exp();
        let d = (1.0 + e * e).powi(2);
        (k * e * e * e / d, k * e / d)
    } else {
        let e = (-t).exp();
        let d = (1.0 + e * e).powi(2);
        (k * e / d, k * e * e * e / d)
    };
    PlanarState::xy(a, b, XyChart::Symmetric)
}

/// Exact time derivative of `unperturbed_orbit`.
pub fn unperturbed_velocity(t: f64) -> [f64; 2] {
    let [a, b] = unperturbed_orbit(t).coords;
    let s = logistic2(t);
    [a * (3.0 - 4.0 * s), b * (1.0 - 4.0 * s)]
}

/// The loop in qp: q = √2 sech t, p = −√2 sech t tanh t.
pub fn unperturbed_qp(t: f64) -> [f64; 2] {
    let sech = 1.0 / t.cosh();
    [SQRT_2 * sech, -SQRT_2 * sech * t.tanh()]
}

/// Unit tangent (u, v) of the closed-form loop.
pub fn unperturbed_tangent(t: f64) -> [f64; 2] {
    // u ∝ −(e^{2t} − 3), v ∝ e^{−2t} − 3; rescale by e^{−2|t|} first.
    let (u, v) = if t >= 0.0 {
        let w = (-2.0 * t).exp();
        (-(1.0 - 3.0 * w), w * w - 3.0 * w)
    } else {
        let w = (2.0 * t).exp();
        (-(w * w - 3.0 * w), 1.0 - 3.0 * w)
    };
    let n = u.hypot(v);
    [u / n, v / n]
}

/// Values of the nonlinear coefficient functions f, g, A, B, C, D of the
/// eigen chart, exactly as displayed there (sign conventions included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearCoeffs {
    pub f: f64,
    pub g: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn nonlinear_coeffs(x: f64, y: f64, alpha: f64, gamma_lambda: f64) -> NonlinearCoeffs {
    let n = 1.0 + alpha * alpha;
    let q = x + alpha * y;
    let p = y - alpha * x;
    let q2 = q * q;
    let core = gamma_lambda * q2 * p + q2 * q;
    NonlinearCoeffs {
        f: alpha / n * core,
        g: -core / n,
        a: alpha / n * q2 * p,
        b: -q2 * p / n,
        c: alpha / n * q2,
        d: -q2 / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extended_field_examples() {
        let par = SystemParams::new(0.1, 0.0, 0.0, 0.01, 1.0, 0.05).unwrap();
        let d = vector_field_extended(&ExtendedState::new(SQRT_2, 0.0, std::f64::consts::FRAC_PI_2), &par);
        assert!((d[0]).abs() < 1e-15);
        assert!((d[1] - (-SQRT_2 + 0.02)).abs() < 1e-14);
        assert_eq!(d[2], 1.0);
        let d0 = vector_field_extended(&ExtendedState::new(0.0, 0.0, 2.0), &par);
        assert_eq!(d0, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn autonomous_field_examples() {
        assert_eq!(vector_field_autonomous(1.0, 0.0, 0.3, 0.7), [0.0, 0.0]);
        let d = vector_field_autonomous(0.5, 0.2, 0.05, 0.0);
        assert!((d[0] - 0.2).abs() < 1e-15 && (d[1] - 0.365).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalues(0.0).unwrap(), (1.0, 1.0));
        let (a, b) = eigenvalues(0.2).unwrap();
        assert!((a - 1.1049876).abs() < 1e-7 && (b - 0.9049876).abs() < 1e-7);
        assert!(eigenvalues(-0.1).is_err());
    }

    #[test]
    fn orbit_apex_and_tails() {
        let s = unperturbed_orbit(0.0);
        assert!((s.coords[0] - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((s.coords[1] - SQRT_2 / 2.0).abs() < 1e-15);
        let far = unperturbed_orbit(40.0).coords;
        assert!((far[0] / (2.0 * SQRT_2 * (-40.0f64).exp()) - 1.0).abs() < 1e-12);
        let far = unperturbed_orbit(-40.0).coords;
        assert!((far[1] / (2.0 * SQRT_2 * (-40.0f64).exp()) - 1.0).abs() < 1e-12);
        let huge = unperturbed_orbit(800.0).coords;
        assert!(huge[0].is_finite() && huge[1].is_finite());
    }

    #[test]
    fn tangent_examples() {
        let [u, v] = unperturbed_tangent(0.0);
        assert!((u - 1.0 / SQRT_2).abs() < 1e-15 && (v + 1.0 / SQRT_2).abs() < 1e-15);
        let [u, v] = unperturbed_tangent(3f64.sqrt().ln());
        assert!(u.abs() < 1e-14 && (v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn tangent_is_normalized_velocity() {
        for i in -40..=40 {
            let t = i as f64 * 0.25;
            let h = 1e-5;
            let p = unperturbed_orbit(t + h).coords;
            let m = unperturbed_orbit(t - h).coords;
            let fd = [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)];
            let n = fd[0].hypot(fd[1]);
            let tan = unperturbed_tangent(t);
            assert!((fd[0] / n - tan[0]).abs() < 1e-6, "t = {t}");
            assert!((fd[1] / n - tan[1]).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn symmetric_chart_example() {
        let s = convert(&PlanarState::qp(SQRT_2, 0.0), Frame::Xy(XyChart::Symmetric), 1.0);
        assert!((s.coords[0] - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((s.coords[1] - SQRT_2 / 2.0).abs() < 1e-15);
        let z = convert(&PlanarState::xy(0.0, 0.0, XyChart::Eigen), Frame::Qp, 1.3);
        assert_eq!(z.coords, [0.0, 0.0]);
    }

    #[test]
    fn charts_agree_at_alpha_one() {
        let s = PlanarState::qp(0.3, -1.7);
        let e = convert(&s, Frame::Xy(XyChart::Eigen), 1.0);
        let h = convert(&s, Frame::Xy(XyChart::Symmetric), 1.0);
        assert!((e.coords[0] - h.coords[0]).abs() < 1e-15);
        assert!((e.coords[1] - h.coords[1]).abs() < 1e-15);
    }

    #[test]
    fn coefficient_examples() {
        let z = nonlinear_coeffs(0.0, 0.0, 1.2, 0.3);
        assert_eq!([z.f, z.g, z.a, z.b, z.c, z.d], [0.0; 6]);
        let c = nonlinear_coeffs(1.0, 0.0, 1.0, 0.0);
        assert!((c.f - 0.5).abs() < 1e-15 && (c.c - 0.5).abs() < 1e-15 && (c.a + 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip_frames(q in -5.0f64..5.0, p in -5.0f64..5.0, lambda in 0.0f64..0.5) {
            let (alpha, _) = eigenvalues(lambda).unwrap();
            for chart in [XyChart::Eigen, XyChart::Symmetric] {
                let s = PlanarState::qp(q, p);
                let xy = convert(&s, Frame::Xy(chart), alpha);
                let back = convert(&xy, Frame::Qp, alpha);
                prop_assert!((back.coords[0] - q).abs() < 1e-12);
                prop_assert!((back.coords[1] - p).abs() < 1e-12);
            }
        }

        #[test]
        fn coefficient_structure(x in -2.0f64..2.0, y in -2.0f64..2.0, alpha in 1.0f64..1.2, g in -0.5f64..0.5) {
            let c = nonlinear_coeffs(x, y, alpha, g);
            prop_assert!((c.g + c.f / alpha).abs() <= 1e-12 * (1.0 + c.f.abs()));
            prop_assert!((c.b + c.a / alpha).abs() <= 1e-12 * (1.0 + c.a.abs()));
            prop_assert!((c.d + c.c / alpha).abs() <= 1e-12 * (1.0 + c.c.abs()));
        }

        #[test]
        fn eigen_identities(lambda in 0.0f64..1.0) {
            let (a, b) = eigenvalues(lambda).unwrap();
            prop_assert!((a * b - 1.0).abs() < 1e-14);
            prop_assert!((a - b - lambda).abs() < 1e-14);
            if lambda > 0.0 {
                prop_assert!(a > 1.0 && 1.0 > b && b > 0.0);
            }
        }

        #[test]
        fn tangent_unit(t in -300.0f64..300.0) {
            let [u, v] = unperturbed_tangent(t);
            prop_assert!((u * u + v * v - 1.0).abs() < 1e-14);
        }
    }
}
