//! Named parameter points with a known dynamical picture. ω and ρ may be given
//! relative to derived quantities (c, ρ₀, Q, the double-crossing band) and are
//! resolved against the computed loop.

use crate::error::{Error, Result};
use crate::melnikov::MelnikovConstants;
use crate::model::SystemParams;
use crate::regimes::{dc_band, Classifier};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoChoice {
    Value(f64),
    /// Multiple of the map constant c at the resolved ω.
    TimesC(f64),
    /// Multiple of ρ₀.
    TimesRho0(f64),
    /// Midpoint of the double-crossing band.
    BandMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaChoice {
    Value(f64),
    /// Fraction of Q at the resolved ρ; needs ρ independent of ω.
    FractionOfQ(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub lambda: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub omega: OmegaChoice,
    pub rho: RhoChoice,
}

pub const PRESETS: [Preset; 3] = [
    Preset {
        name: "tangle1",
        summary: "below S*: full-shift windows and sinks in the a-scan",
        lambda: 0.1,
        epsilon: 0.05,
        mu: 1e-12,
        omega: OmegaChoice::Value(5.0),
        rho: RhoChoice::TimesC(0.5),
    },
    Preset {
        name: "curve1",
        summary: "invariant-curve regime, rho = 2 rho0 and omega = Q/2",
        lambda: 0.05,
        epsilon: 0.05,
        mu: 1e-4,
        omega: OmegaChoice::FractionOfQ(0.5),
        rho: RhoChoice::TimesRho0(2.0),
    },
    Preset {
        name: "rankone120",
        summary: "double-crossing band at omega = 120",
        lambda: 0.05,
        epsilon: 0.05,
        mu: 1e-4,
        omega: OmegaChoice::Value(120.0),
        rho: RhoChoice::BandMidpoint,
    },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        Error::InvalidParameter(format!("unknown preset '{name}' (known: {})", known.join(", ")))
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ResolvedPreset {
    pub preset: Preset,
    pub omega: f64,
    pub rho: f64,
    pub rho0: f64,
    /// Q at the resolved ρ when ω was chosen from it.
    pub q: Option<f64>,
    pub params: SystemParams,
    pub constants: MelnikovConstants,
}

impl Preset {
    pub fn resolve(&self) -> Result<ResolvedPreset> {
        self.resolve_with(&Classifier::new(self.lambda, self.epsilon)?)
    }

    pub fn resolve_with(&self, cl: &Classifier) -> Result<ResolvedPreset> {
        let rho0 = cl.rho0();
        let (omega, q, rho) = match self.omega {
            OmegaChoice::Value(w) => {
                let rho = match self.rho {
                    RhoChoice::Value(r) => r,
                    RhoChoice::TimesRho0(f) => f * rho0,
                    // c and the band do not depend on ρ
                    RhoChoice::TimesC(f) => f * cl.constants(w, self.mu, 1.0)?.c,
                    RhoChoice::BandMidpoint => {
                        let (lo, hi) = dc_band(&cl.constants(w, self.mu, 1.0)?);
                        0.5 * (lo + hi)
                    }
                };
                (w, None, rho)
            }
            OmegaChoice::FractionOfQ(f) => {
                let rho = match self.rho {
                    RhoChoice::Value(r) => r,
                    RhoChoice::TimesRho0(g) => g * rho0,
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "preset {}: omega from Q needs rho independent of omega",
                            self.name
                        )))
                    }
                };
                let q = cl.q_surface(rho)?;
                (f * q, Some(q), rho)
            }
        };
        let constants = cl.constants(omega, self.mu, rho)?;
        let params = SystemParams::new(self.lambda, constants.gamma_lambda, rho, self.mu, omega, self.epsilon)?;
        Ok(ResolvedPreset { preset: *self, omega, rho, rho0, q, params, constants })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(preset("tangle1").unwrap().lambda, 0.1);
        assert!(preset("nope").is_err());
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }

    #[test]
    fn omega_from_q_rejects_c_relative_rho() {
        let bad = Preset { rho: RhoChoice::TimesC(1.0), ..*preset("curve1").unwrap() };
        let cl = Classifier::new(bad.lambda, bad.epsilon).unwrap();
        assert!(bad.resolve_with(&cl).is_err());
    }

    #[test]
    fn tangle1_sits_below_s_star() {
        let r = preset("tangle1").unwrap().resolve().unwrap();
        assert!((r.rho / r.constants.c - 0.5).abs() < 1e-12);
        assert!(r.constants.reduced_map().escape_interval().is_some());
    }

    #[test]
    fn curve1_is_in_the_curve_regime() {
        let p = preset("curve1").unwrap();
        let cl = Classifier::new(p.lambda, p.epsilon).unwrap();
        let r = p.resolve_with(&cl).unwrap();
        assert!((r.omega - 0.5 * r.q.unwrap()).abs() < 1e-15);
        let reg = cl.classify(r.omega, r.rho, r.preset.mu).unwrap();
        assert_eq!(reg.tag, crate::regimes::RegimeTag::InvariantCurve);
    }
}
