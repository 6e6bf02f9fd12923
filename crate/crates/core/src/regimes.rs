//! Parameter surfaces S*, S, Q, the double-crossing band, and the scenario
//! classification of (ω, ρ, μ).

use crate::error::{Error, Result};
use crate::homoclinic::{compute_loop, HomoclinicProfile};
use crate::melnikov::{ConstantsOptions, MelnikovCalculator, MelnikovConstants};
use crate::numerics::find_root;

pub const DC_LO: f64 = 202.0 / 99.0;
pub const DC_HI: f64 = 396.0 / 101.0;
/// Width multiplier of the O(ε + μ) band attached to S*.
pub const BAND_KAPPA: f64 = 10.0;
/// ρ₀ is taken this much above its lower bound.
pub const RHO0_FACTOR: f64 = 1.05;
/// Above this ω the rank-one band is known to contain horseshoes.
pub const HORSESHOE_OMEGA: f64 = 100.0;
pub const DEFAULT_EPSILON: f64 = 0.05;

/// min_θ F(θ, 0) for the truncated model.
pub fn m_of_rho(mc: &MelnikovConstants, rho: f64) -> f64 {
    rho - mc.c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SStar {
    pub value: f64,
    /// ±κ(ε + μ).
    pub band: f64,
}

pub fn s_star(mc: &MelnikovConstants) -> SStar {
    let band = BAND_KAPPA * (mc.epsilon + mc.mu);
    if mc.c == 0.0 {
        return SStar { value: 0.0, band };
    }
    let value = find_root(|r| m_of_rho(mc, r), 0.0, 2.0 * mc.c + 1.0, 1e-15 * mc.c.max(1.0)).unwrap_or(mc.c);
    SStar { value, band }
}

pub fn s_surface(omega: f64, s_star: f64) -> f64 {
    (1.0 + omega.sqrt()) * s_star
}

/// Lower and upper ρ of the double-crossing band, scaled by the map constant c.
pub fn dc_band(mc: &MelnikovConstants) -> (f64, f64) {
    (DC_LO * mc.c, DC_HI * mc.c)
}

/// Sup of the interval (0, ω*] on which ω ≤ 10⁻⁵ M/c(ω) and M ≥ ρ₀/10, M = ρ − c(ω).
pub fn q_surface(rho: f64, rho0: f64, c_of: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    if !(rho > rho0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must exceed rho0 = {rho0}")));
    }
    let holds = |w: f64| -> Result<bool> {
        let c = c_of(w)?;
        let m = rho - c;
        Ok(m >= 0.1 * rho0 && w * c <= 1e-5 * m)
    };
    let mut lo = 1e-12;
    if !holds(lo)? {
        return Err(Error::InvalidParameter(format!("Q conditions fail already at omega = {lo}")));
    }
    let cap = 1e4;
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if hi > cap {
            return Ok(cap);
        }
        if !holds(hi)? {
            break;
        }
        lo = hi;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeTag {
    BelowSStar,
    RankOneBand { horseshoe: bool },
    InvariantCurve,
    Unclassified,
}

impl RegimeTag {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeTag::BelowSStar => "BelowSStar",
            RegimeTag::RankOneBand { .. } => "RankOneBand",
            RegimeTag::InvariantCurve => "InvariantCurve",
            RegimeTag::Unclassified => "Unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    pub s_star: SStar,
    pub s: f64,
    pub rho0: f64,
    /// Only computed when ρ > ρ₀.
    pub q: Option<f64>,
    /// ρ − S*
    pub margin_s_star: f64,
    /// S − ρ
    pub margin_s: f64,
    /// ρ − ρ₀
    pub margin_rho0: f64,
    /// Q − ω
    pub margin_q: Option<f64>,
}

/// Classification for one λ and ε, holding the loop so that repeated queries
/// only redo the ω-dependent integrals.
pub struct Classifier {
    profile: Box<dyn HomoclinicProfile>,
    lambda: f64,
    epsilon: f64,
    opts: ConstantsOptions,
    rho0: f64,
}

impl Classifier {
    pub fn new(lambda: f64, epsilon: f64) -> Result<Self> {
        Self::from_profile(Box::new(compute_loop(lambda, epsilon)?), lambda, epsilon, ConstantsOptions::default())
    }

    pub fn from_profile(
        profile: Box<dyn HomoclinicProfile>,
        lambda: f64,
        epsilon: f64,
        opts: ConstantsOptions,
    ) -> Result<Self> {
        let calc = MelnikovCalculator::new(profile.as_ref(), lambda, epsilon, opts)?;
        let rho0 = RHO0_FACTOR * 2.0 * calc.c_full_at(0.0)?;
        Ok(Classifier { profile, lambda, epsilon, opts, rho0 })
    }

    pub fn calculator(&self) -> Result<MelnikovCalculator<'_>> {
        MelnikovCalculator::new(self.profile.as_ref(), self.lambda, self.epsilon, self.opts)
    }

    pub fn profile(&self) -> &dyn HomoclinicProfile {
        self.profile.as_ref()
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn constants(&self, omega: f64, mu: f64, rho: f64) -> Result<MelnikovConstants> {
        self.calculator()?.constants(omega, mu, rho)
    }

    pub fn q_surface(&self, rho: f64) -> Result<f64> {
        let calc = self.calculator()?;
        q_surface(rho, self.rho0, |w| calc.c_at(w))
    }

    pub fn classify(&self, omega: f64, rho: f64, mu: f64) -> Result<Regime> {
        if !(omega > 0.0 && rho > 0.0 && mu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need omega > 0, rho > 0, mu >= 0 (got {omega}, {rho}, {mu})"
            )));
        }
        let mc = self.constants(omega, mu, rho)?;
        let ss = s_star(&mc);
        let s = s_surface(omega, ss.value);
        let q = if rho > self.rho0 { Some(self.q_surface(rho)?) } else { None };
        let tag = match q {
            Some(q) if omega < q => RegimeTag::InvariantCurve,
            _ if rho < ss.value => RegimeTag::BelowSStar,
            _ if rho > ss.value && rho < s => RegimeTag::RankOneBand { horseshoe: omega > HORSESHOE_OMEGA },
            _ => RegimeTag::Unclassified,
        };
        Ok(Regime {
            tag,
            s_star: ss,
            s,
            rho0: self.rho0,
            q,
            margin_s_star: rho - ss.value,
            margin_s: s - rho,
            margin_rho0: rho - self.rho0,
            margin_q: q.map(|q| q - omega),
        })
    }
}

pub fn classify(omega: f64, rho: f64, mu: f64, lambda: f64) -> Result<Regime> {
    Classifier::new(lambda, DEFAULT_EPSILON)?.classify(omega, rho, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homoclinic::ClosedFormLoop;
    use crate::melnikov::{compute_a, compute_cs, Normalization};
    use std::sync::OnceLock;

    fn classifier() -> &'static Classifier {
        static C: OnceLock<Classifier> = OnceLock::new();
        C.get_or_init(|| Classifier::new(0.05, 0.05).unwrap())
    }

    #[test]
    fn m_examples() {
        let mc = classifier().constants(1.0, 1e-4, 1.0).unwrap();
        assert_eq!(m_of_rho(&mc, mc.c), 0.0);
        assert_eq!(m_of_rho(&mc, 0.0), -mc.c);
        let m: Vec<f64> = (0..100).map(|i| m_of_rho(&mc, 0.05 * i as f64)).collect();
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        assert!((s_star(&mc).value - mc.c).abs() < 1e-12);
    }

    #[test]
    fn s_surface_examples() {
        assert_eq!(s_surface(4.0, 1.0), 3.0);
        assert!((s_surface(1e-12, 2.0) - 2.0).abs() < 1e-5);
        assert!((s_surface(100.0, 1.5) - 1.5 - 10.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn band_fractions() {
        assert!((DC_LO - 2.040404).abs() < 1e-6 && (DC_HI - 3.920792).abs() < 1e-6);
        assert!(DC_HI / DC_LO > 1.92);
        // 1 + √ω = 396/101
        let w = (DC_HI - 1.0).powi(2);
        assert!((w - 8.5310).abs() < 1e-3);
    }

    #[test]
    fn band_between_surfaces_for_large_omega() {
        let calc = classifier().calculator().unwrap();
        for omega in [9.0, 20.0, 60.0, 120.0, 200.0] {
            let mc = calc.constants(omega, 1e-4, 1.0).unwrap();
            let (lo, hi) = dc_band(&mc);
            let ss = s_star(&mc).value;
            assert!(ss < lo && hi < s_surface(omega, ss), "omega = {omega}");
        }
    }

    #[test]
    fn s_star_continuous_in_omega() {
        let calc = classifier().calculator().unwrap();
        let h = 0.05;
        let v: Vec<f64> = (0..=40).map(|i| calc.c_at(0.5 + h * i as f64).unwrap()).collect();
        let d: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let median = {
            let mut s = d.clone();
            s.sort_by(f64::total_cmp);
            s[s.len() / 2]
        };
        assert!(d.iter().all(|&x| x < 10.0 * median.max(1e-6)), "{d:?}");
    }

    #[test]
    fn s_star_from_integrals_at_zero_damping() {
        let p = ClosedFormLoop;
        let calc = MelnikovCalculator::new(&p, 0.0, 1e-3, ConstantsOptions::default()).unwrap();
        let mc = calc.constants(1.0, 1e-6, 1.0).unwrap();
        let a = compute_a(&p, Normalization::Symmetric, 1e-10).unwrap();
        let cs = compute_cs(1.0, &p, Normalization::Symmetric, 1e-10).unwrap();
        let expect = cs.c.hypot(cs.s) / a;
        assert!((s_star(&mc).value - expect).abs() < 1e-2 * expect, "{} {expect}", s_star(&mc).value);
    }

    #[test]
    fn classify_examples() {
        let cl = classifier();
        let mc = cl.constants(1.0, 1e-4, 1.0).unwrap();
        let ss = s_star(&mc).value;
        assert_eq!(cl.classify(1.0, 0.5 * ss, 1e-4).unwrap().tag, RegimeTag::BelowSStar);

        let mc120 = cl.constants(120.0, 1e-4, 1.0).unwrap();
        let r = cl.classify(120.0, 2.5 * s_star(&mc120).value, 1e-4).unwrap();
        assert_eq!(r.tag, RegimeTag::RankOneBand { horseshoe: true });

        let rho = 2.0 * cl.rho0();
        let q = cl.q_surface(rho).unwrap();
        assert!(q > 0.0 && q < 1e-3, "{q}");
        assert_eq!(cl.classify(0.5 * q, rho, 1e-4).unwrap().tag, RegimeTag::InvariantCurve);
    }

    #[test]
    fn q_grows_with_rho() {
        let cl = classifier();
        let qs: Vec<f64> = [1.5, 2.0, 4.0, 8.0].iter().map(|f| cl.q_surface(f * cl.rho0()).unwrap()).collect();
        assert!(qs.windows(2).all(|w| w[1] > w[0]), "{qs:?}");
        assert!(cl.q_surface(0.9 * cl.rho0()).is_err());
    }

    #[test]
    fn q_of_constant_amplitude() {
        // c ≡ 1, ρ = 3, ρ₀ = 1: ω* = 2·10⁻⁵
        let q = q_surface(3.0, 1.0, |_| Ok(1.0)).unwrap();
        assert!((q - 2e-5).abs() < 1e-15);
    }
}
