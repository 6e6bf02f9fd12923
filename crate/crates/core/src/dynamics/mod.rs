//! Orbit-level analysis of the reduced map and parameter scans.

pub mod curve;
pub mod lyapunov;
pub mod rotation;
pub mod shift;
pub mod sinks;

pub use curve::{invariant_curve, ConeReport, CurveOptions, InvariantCurveResult, PeriodicSpline};
pub use lyapunov::{lyapunov, Lyapunov};
pub use rotation::{check_circle_map, rotation_number, Rotation};
pub use shift::{verify_full_shift, ShiftOptions, ShiftReport, ShiftStatus};
pub use sinks::{find_sinks, Sink};

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::retmap::{Domain, ReducedMap};

pub const MAX_SCAN_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    FullShift,
    Sink(usize),
    InvariantCurve,
    PositiveLyapunov(f64),
    EscapeDominated,
    Undetermined,
}

impl Outcome {
    pub fn name(&self) -> &'static str {
        match self {
            Outcome::FullShift => "FullShift",
            Outcome::Sink(_) => "Sink",
            Outcome::InvariantCurve => "InvariantCurve",
            Outcome::PositiveLyapunov(_) => "PositiveLyapunov",
            Outcome::EscapeDominated => "EscapeDominated",
            Outcome::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub param: f64,
    pub outcome: Outcome,
    pub lyap1: Option<f64>,
    pub lyap2: Option<f64>,
    /// Rotation number of the 1-D reduction when it is a circle homeomorphism.
    pub rotation: Option<f64>,
    pub period: Option<usize>,
    pub branches: Option<usize>,
    pub fold_margin: Option<f64>,
    pub expansion_margin: Option<f64>,
    /// Fraction of sink-search seeds that escaped.
    pub escape_fraction: Option<f64>,
}

impl ScanRecord {
    fn empty(param: f64) -> Self {
        ScanRecord {
            param,
            outcome: Outcome::Undetermined,
            lyap1: None,
            lyap2: None,
            rotation: None,
            period: None,
            branches: None,
            fold_margin: None,
            expansion_margin: None,
            escape_fraction: None,
        }
    }
}

/// Per-point work limits and thresholds.
#[derive(Debug, Clone, Copy)]
pub struct ScanBudget {
    pub n_iter: usize,
    pub n_transient: usize,
    pub lyapunov_seeds: usize,
    pub sink_seeds: usize,
    pub sink_iter: usize,
    pub shift: ShiftOptions,
    /// Λ₁ above this counts as positive.
    pub lyap_threshold: f64,
    pub escape_threshold: f64,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget {
            n_iter: 10_000,
            n_transient: 1_000,
            lyapunov_seeds: 8,
            sink_seeds: 32,
            sink_iter: 2_000,
            shift: ShiftOptions::default(),
            lyap_threshold: 1e-3,
            escape_threshold: 0.9,
        }
    }
}

pub struct ScanContext<'a> {
    pub budget: &'a ScanBudget,
    /// Seed for this grid point, derived from the scan seed and the index.
    pub seed: u64,
}

/// One stage of the per-point pipeline. Every analyzer fills diagnostics; the
/// first one to return an outcome decides the record's tag.
pub trait Analyzer: Send + Sync {
    fn name(&self) -> &'static str;
    fn analyze(&self, map: &ReducedMap, ctx: &ScanContext, rec: &mut ScanRecord) -> Option<Outcome>;
}

pub struct FullShiftAnalyzer;
pub struct SinkAnalyzer;
pub struct CircleAnalyzer;
pub struct LyapunovAnalyzer;

impl Analyzer for FullShiftAnalyzer {
    fn name(&self) -> &'static str {
        "full-shift"
    }
    fn analyze(&self, map: &ReducedMap, ctx: &ScanContext, rec: &mut ScanRecord) -> Option<Outcome> {
        let r = verify_full_shift(map, &ctx.budget.shift);
        if r.status == ShiftStatus::NotApplicable {
            return None;
        }
        rec.branches = Some(r.branches);
        rec.fold_margin = Some(r.fold_margin);
        rec.expansion_margin = Some(r.expansion_margin);
        (r.status == ShiftStatus::Pass).then_some(Outcome::FullShift)
    }
}

impl Analyzer for SinkAnalyzer {
    fn name(&self) -> &'static str {
        "sinks"
    }
    fn analyze(&self, map: &ReducedMap, ctx: &ScanContext, rec: &mut ScanRecord) -> Option<Outcome> {
        let n = ctx.budget.sink_seeds;
        let grid: Vec<f64> = (0..n).map(|i| TAU * (i as f64 + 0.5) / n as f64).collect();
        let sinks = find_sinks(map, &grid, ctx.budget.sink_iter);
        let captured: usize = sinks.iter().map(|s| s.basin).sum();
        let escaped = grid.iter().filter(|&&t| survives(map, t, ctx.budget.sink_iter).is_none()).count();
        rec.escape_fraction = Some(escaped as f64 / n as f64);
        let best = sinks.iter().max_by_key(|s| s.basin)?;
        rec.period = Some(best.period);
        (captured > 0).then_some(Outcome::Sink(best.period))
    }
}

impl Analyzer for CircleAnalyzer {
    fn name(&self) -> &'static str {
        "circle"
    }
    fn analyze(&self, map: &ReducedMap, _: &ScanContext, rec: &mut ScanRecord) -> Option<Outcome> {
        if map.domain() != Domain::Circle || !map.critical_points().is_empty() {
            return None;
        }
        let r = rotation_number(&|t| map.lift_1d(t), 20_000, 1e-6).ok()?;
        rec.rotation = Some(r.value);
        Some(Outcome::InvariantCurve)
    }
}

impl Analyzer for LyapunovAnalyzer {
    fn name(&self) -> &'static str {
        "lyapunov"
    }
    fn analyze(&self, map: &ReducedMap, ctx: &ScanContext, rec: &mut ScanRecord) -> Option<Outcome> {
        let b = ctx.budget;
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        for _ in 0..b.lyapunov_seeds.max(1) {
            let t0 = rng.gen_range(0.0..TAU);
            if let Ok(l) = lyapunov(map, (t0, 0.0), b.n_iter, b.n_transient) {
                rec.lyap1 = Some(l.l1);
                rec.lyap2 = Some(l.l2);
                return (l.l1 > b.lyap_threshold).then_some(Outcome::PositiveLyapunov(l.l1));
            }
        }
        Some(Outcome::EscapeDominated)
    }
}

fn survives(map: &ReducedMap, t0: f64, n: usize) -> Option<(f64, f64)> {
    let mut p = (t0, 0.0);
    for _ in 0..n {
        p = map.apply(p.0, p.1).point()?;
    }
    Some(p)
}

/// Ordered analyzer pipeline.
pub struct AnalyzerRegistry {
    analyzers: Vec<Box<dyn Analyzer>>,
}

impl Default for AnalyzerRegistry {
    fn default() -> Self {
        let mut r = AnalyzerRegistry::empty();
        r.register(Box::new(FullShiftAnalyzer));
        r.register(Box::new(SinkAnalyzer));
        r.register(Box::new(CircleAnalyzer));
        r.register(Box::new(LyapunovAnalyzer));
        r
    }
}

impl AnalyzerRegistry {
    pub fn empty() -> Self {
        AnalyzerRegistry { analyzers: Vec::new() }
    }

    pub fn register(&mut self, a: Box<dyn Analyzer>) {
        self.analyzers.push(a);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.analyzers.iter().map(|a| a.name()).collect()
    }

    pub fn run(&self, param: f64, map: &ReducedMap, ctx: &ScanContext) -> ScanRecord {
        let mut rec = ScanRecord::empty(param);
        let mut decided = None;
        for a in &self.analyzers {
            let o = a.analyze(map, ctx, &mut rec);
            if decided.is_none() {
                decided = o;
            }
        }
        if let Some(o) = decided {
            if rec.escape_fraction.is_some_and(|f| f > ctx.budget.escape_threshold)
                && !matches!(o, Outcome::FullShift | Outcome::Sink(_))
            {
                rec.outcome = Outcome::EscapeDominated;
            } else {
                rec.outcome = o;
            }
        }
        rec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParam {
    A,
    Mu,
}

/// The reduced map as a function of the phase constant a or of μ, the latter via
/// a(μ) = a₀ + (ω/β) ln(μ₀/μ) and b(μ) = b₀ (μ/μ₀)^{α/β−1}.
#[derive(Debug, Clone, Copy)]
pub struct MapFamily {
    pub base: ReducedMap,
    pub mu0: f64,
}

impl MapFamily {
    pub fn at(&self, param: ScanParam, v: f64) -> Result<ReducedMap> {
        match param {
            ScanParam::A => Ok(self.base.with_a(v)),
            ScanParam::Mu => {
                if !(v > 0.0 && self.mu0 > 0.0) {
                    return Err(Error::InvalidParameter(format!("mu = {v} must be > 0")));
                }
                let m = &self.base;
                let a = m.a_unreduced + m.omega_beta * (self.mu0 / v).ln();
                let b = m.b * (v / self.mu0).powf(m.alpha_beta - 1.0);
                Ok(ReducedMap { b, ..m.with_a(a) })
            }
        }
    }
}

pub fn grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect()
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the pipeline on `steps` equally spaced parameter values (both ends
/// included). Records come back in grid order and depend only on the inputs.
pub fn bifurcation_scan(
    family: &MapFamily,
    param: ScanParam,
    range: (f64, f64),
    steps: usize,
    budget: &ScanBudget,
    seed: u64,
    registry: &AnalyzerRegistry,
) -> Result<Vec<ScanRecord>> {
    if steps == 0 || steps > MAX_SCAN_STEPS {
        return Err(Error::InvalidParameter(format!("steps = {steps} outside [1, {MAX_SCAN_STEPS}]")));
    }
    let values = grid(range.0, range.1, steps);
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let map = family.at(param, v)?;
            let ctx = ScanContext { budget, seed: point_seed(seed, i) };
            Ok(registry.run(v, &map, &ctx))
        })
        .collect()
}
