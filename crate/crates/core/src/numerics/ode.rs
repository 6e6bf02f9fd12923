//! Dormand–Prince 5(4) with the free 4th-order dense output, plus event location
//! on the interpolant.

use crate::error::{Error, Result};
use crate::numerics::roots::find_root;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense output at time t inside the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.h > 0.0 { (self.t0, self.t1()) } else { (self.t1(), self.t0) };
        t >= lo && t <= hi
    }
}

/// Accepted steps of one integration run, ordered along the direction of travel.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub steps: Vec<Step<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.steps[0].t0
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map(|s| s.t1()).unwrap_or(f64::NAN)
    }

    pub fn times(&self) -> Vec<f64> {
        let mut v = vec![self.t_start()];
        v.extend(self.steps.iter().map(|s| s.t1()));
        v
    }

    pub fn states(&self) -> Vec<[f64; N]> {
        let mut v = vec![self.steps[0].y0];
        v.extend(self.steps.iter().map(|s| s.y1));
        v
    }

    pub fn last_state(&self) -> [f64; N] {
        self.steps.last().map(|s| s.y1).unwrap_or([f64::NAN; N])
    }

    /// Dense evaluation; `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let fwd = self.steps.first()?.h > 0.0;
        // steps are monotone in t0, so binary search on the start times
        let idx = self.steps.partition_point(|s| if fwd { s.t1() < t } else { s.t1() > t });
        let step = self.steps.get(idx)?;
        step.contains(t).then(|| step.eval(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The section function increases along the direction of travel.
    Rising,
    /// It decreases along the direction of travel.
    Falling,
    Either,
}

impl Direction {
    pub fn sign(self) -> i8 {
        match self {
            Direction::Rising => 1,
            Direction::Falling => -1,
            Direction::Either => 0,
        }
    }

    fn admits(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Either => rising || falling,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionEvent<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    /// +1 or −1, measured along the direction of travel.
    pub direction: i8,
}

/// A scalar section function together with the accepted crossing direction.
pub struct Event<'a, const N: usize> {
    pub g: &'a dyn Fn(&[f64; N]) -> f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub event: SectionEvent<N>,
    pub steps: usize,
}

/// Adaptive Dormand–Prince 5(4) settings.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Event times are refined to this width.
    pub event_tol: f64,
    /// |dg/dt| below this at a crossing is reported as tangential.
    pub tangency_tol: f64,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Result<Self> {
        if !(1e-13..=1e-3).contains(&tol) {
            return Err(Error::InvalidParameter(format!("tolerance {tol:e} outside [1e-13, 1e-3]")));
        }
        Ok(Dopri5 {
            rtol: tol,
            atol: tol,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            event_tol: 1e-12,
            tangency_tol: 1e-10,
        })
    }

    fn err_scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }

    fn initial_step<const N: usize, F>(&self, f: &mut F, t0: f64, y0: &[f64; N], k1: &[f64; N], dir: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            let sk = self.err_scale(y0[i], y0[i]);
            dnf += (k1[i] / sk).powi(2);
            dny += (y0[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
        h = h.min(self.h_max);
        let y1: [f64; N] = std::array::from_fn(|i| y0[i] + dir * h * k1[i]);
        let k2 = f(t0 + dir * h, &y1);
        let mut der2 = 0.0;
        for i in 0..N {
            let sk = self.err_scale(y0[i], y0[i]);
            der2 += ((k2[i] - k1[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
        (100.0 * h).min(h1).min(self.h_max)
    }

    /// Integrate from (t0, y0) toward t_end, handing every accepted step to `on_step`.
    /// Returning `Ok(false)` from the callback stops the run early.
    pub fn drive<const N: usize, F, C>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut on_step: C,
    ) -> Result<usize>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        C: FnMut(&Step<N>) -> Result<bool>,
    {
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t0 });
        }
        let span = t_end - t0;
        if span == 0.0 {
            return Ok(0);
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&mut f, t, &y, &k1, dir);
        let mut fac_old: f64 = 1e-4;
        let mut reject = false;
        let mut accepted = 0usize;
        let min_h = |t: f64| 16.0 * f64::EPSILON * t.abs().max(1.0);

        for _ in 0..self.max_steps {
            let remaining = (t_end - t) * dir;
            if remaining <= 0.0 {
                return Ok(accepted);
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < min_h(t) {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let hs = dir * h;
            let y2: [f64; N] = std::array::from_fn(|i| y[i] + hs * A21 * k1[i]);
            let k2 = f(t + C2 * hs, &y2);
            let y3: [f64; N] = std::array::from_fn(|i| y[i] + hs * (A31 * k1[i] + A32 * k2[i]));
            let k3 = f(t + C3 * hs, &y3);
            let y4: [f64; N] = std::array::from_fn(|i| y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]));
            let k4 = f(t + C4 * hs, &y4);
            let y5: [f64; N] =
                std::array::from_fn(|i| y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]));
            let k5 = f(t + C5 * hs, &y5);
            let y6: [f64; N] = std::array::from_fn(|i| {
                y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            });
            let k6 = f(t + hs, &y6);
            let yn: [f64; N] = std::array::from_fn(|i| {
                y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
            });
            let k7 = f(t + hs, &yn);

            let mut err = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err += (e / self.err_scale(y[i], yn[i])).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || yn.iter().any(|v| !v.is_finite()) {
                if h <= min_h(t) {
                    return Err(Error::NonFinite { t });
                }
                h *= 0.1;
                reject = true;
                continue;
            }

            // PI step-size controller (Hairer's constants)
            let fac11 = err.powf(0.2 - 0.04 * 0.75);
            let mut fac = fac11 / fac_old.powf(0.04);
            fac = (fac / 0.9).clamp(1.0 / 10.0, 1.0 / 0.2);
            let h_new = h / fac;

            if err <= 1.0 {
                fac_old = err.max(1e-4);
                let rc2: [f64; N] = std::array::from_fn(|i| yn[i] - y[i]);
                let rc3: [f64; N] = std::array::from_fn(|i| hs * k1[i] - rc2[i]);
                let rc4: [f64; N] = std::array::from_fn(|i| rc2[i] - hs * k7[i] - rc3[i]);
                let rc5: [f64; N] = std::array::from_fn(|i| {
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                });
                let step = Step { t0: t, h: hs, y0: y, y1: yn, rcont: [y, rc2, rc3, rc4, rc5] };
                accepted += 1;
                let t_next = if last { t_end } else { t + hs };
                if !on_step(&step)? {
                    return Ok(accepted);
                }
                t = t_next;
                y = yn;
                k1 = k7;
                let h_new = h_new.min(self.h_max);
                h = if reject { h_new.min(h) } else { h_new };
                reject = false;
            } else {
                h /= (fac11 / 0.9).min(1.0 / 0.2);
                reject = true;
            }
        }
        Err(Error::TooManySteps { t })
    }

    pub fn integrate<const N: usize, F>(&self, f: F, t0: f64, y0: [f64; N], t_end: f64) -> Result<Trajectory<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut steps = Vec::new();
        self.drive(f, t0, y0, t_end, |s| {
            steps.push(s.clone());
            Ok(true)
        })?;
        if steps.is_empty() {
            return Err(Error::InvalidParameter("empty integration span".into()));
        }
        Ok(Trajectory { steps })
    }

    /// First crossing of any of `events` along the orbit from (t0, y0) before t_max.
    /// A start point lying exactly on a section does not count as a crossing.
    pub fn first_event<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t_max: f64,
        events: &[Event<'_, N>],
    ) -> Result<EventHit<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        const SUB: usize = 4;
        let mut hit: Option<EventHit<N>> = None;
        let mut g_prev: Vec<f64> = events.iter().map(|e| (e.g)(&y0)).collect();
        let mut count = 0usize;
        self.drive(f, t0, y0, t_max, |step| {
            count += 1;
            let mut best: Option<(f64, usize, f64, f64)> = None;
            for (k, ev) in events.iter().enumerate() {
                let mut ga = g_prev[k];
                let mut ta = step.t0;
                for j in 1..=SUB {
                    let tb = if j == SUB { step.t1() } else { step.t0 + step.h * j as f64 / SUB as f64 };
                    let yb = if j == SUB { step.y1 } else { step.eval(tb) };
                    let gb = (ev.g)(&yb);
                    if ev.direction.admits(ga, gb) {
                        let earlier = best.map_or(true, |(tb0, ..)| (tb - tb0) * step.h.signum() < 0.0);
                        if earlier {
                            best = Some((tb, k, ta, ga));
                        }
                        break;
                    }
                    ga = gb;
                    ta = tb;
                }
                g_prev[k] = (ev.g)(&step.y1);
            }
            if let Some((tb, k, ta, _)) = best {
                let g = |t: f64| (events[k].g)(&step.eval(t));
                let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
                let tc = if g(tb) == 0.0 { tb } else { find_root(g, lo, hi, self.event_tol)? };
                let dt = 1e-7 * step.h.abs();
                let forward = step.h.signum();
                let clamp = |t: f64| t.clamp(lo.min(step.t0.min(step.t1())), hi.max(step.t0.max(step.t1())));
                let slope = (g(clamp(tc + forward * dt)) - g(clamp(tc - forward * dt))) / (2.0 * dt);
                if slope.abs() < self.tangency_tol {
                    return Err(Error::TangentialCrossing { t: tc, slope });
                }
                hit = Some(EventHit {
                    index: k,
                    event: SectionEvent { t: tc, state: step.eval(tc), direction: slope.signum() as i8 },
                    steps: count,
                });
                return Ok(false);
            }
            Ok(true)
        })?;
        hit.ok_or(Error::NoCrossing { t_max })
    }
}

/// Integrate with rtol = atol = tol.
pub fn integrate<const N: usize, F>(field: F, state0: [f64; N], t_span: (f64, f64), tol: f64) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    Dopri5::new(tol)?.integrate(field, t_span.0, state0, t_span.1)
}

/// First crossing of `section` in the requested direction before t_max.
pub fn integrate_to_section<const N: usize, F, G>(
    field: F,
    state0: [f64; N],
    t0: f64,
    t_max: f64,
    section: G,
    direction: Direction,
    tol: f64,
) -> Result<SectionEvent<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    let ev = [Event { g: &section, direction }];
    Ok(Dopri5::new(tol)?.first_event(field, t0, state0, t_max, &ev)?.event)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy, symmetric_xy_field, unperturbed_orbit, vector_field_autonomous};
    use std::f64::consts::{PI, SQRT_2, TAU};

    fn harmonic(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    fn duffing(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        vector_field_autonomous(y[0], y[1], 0.0, 0.0)
    }

    #[test]
    fn harmonic_period() {
        let tr = integrate(harmonic, [1.0, 0.0], (0.0, TAU), 1e-10).unwrap();
        let y = tr.last_state();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let tr = integrate(harmonic, [1.0, 0.0], (0.0, -1.0), 1e-11).unwrap();
        let y = tr.last_state();
        assert!((y[0] - 1f64.cos()).abs() < 1e-9 && (y[1] - 1f64.sin()).abs() < 1e-9);
        let mid = tr.eval(-0.5).unwrap();
        assert!((mid[0] - 0.5f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn duffing_energy() {
        let tr = integrate(duffing, [SQRT_2, 0.0], (0.0, 10.0), 1e-11).unwrap();
        for y in tr.states() {
            assert!((energy(y[0], y[1]) - 0.0).abs() < 1e-9);
        }
    }

    #[test]
    fn loop_transport() {
        let start = unperturbed_orbit(-5.0).coords;
        let tr = integrate(|_, y: &[f64; 2]| symmetric_xy_field(y[0], y[1]), start, (0.0, 10.0), 1e-11).unwrap();
        let end = tr.last_state();
        let want = unperturbed_orbit(5.0).coords;
        assert!((end[0] - want[0]).abs() < 1e-6 && (end[1] - want[1]).abs() < 1e-6);
    }

    #[test]
    fn halving_tolerance_does_not_hurt() {
        let errs: Vec<f64> = [1e-8, 5e-9, 2.5e-9]
            .iter()
            .map(|&tol| {
                let y = integrate(harmonic, [1.0, 0.0], (0.0, TAU), tol).unwrap().last_state();
                (y[0] - 1.0).hypot(y[1])
            })
            .collect();
        assert!(errs[1] <= errs[0] * 1.5 && errs[2] <= errs[1] * 1.5, "{errs:?}");
    }

    #[test]
    fn dense_output_is_accurate() {
        let tol = 1e-8;
        let solver = Dopri5::new(tol).unwrap();
        let tr = solver.integrate(duffing, 0.0, [SQRT_2 * 0.9, 0.0], 8.0).unwrap();
        let fine = Dopri5::new(1e-13).unwrap();
        for step in &tr.steps {
            for frac in [0.3, 0.5, 0.8] {
                let t = step.t0 + frac * step.h;
                let y = step.eval(t);
                let r = fine.integrate(duffing, step.t0, step.y0, t).unwrap().last_state();
                for i in 0..2 {
                    let scale = solver.err_scale(r[i], r[i]);
                    assert!((y[i] - r[i]).abs() <= 10.0 * scale, "t = {t}");
                }
            }
        }
    }

    #[test]
    fn circle_section() {
        let ev = integrate_to_section(
            |_, y: &[f64; 2]| [-y[1], y[0]],
            [0.0, 1.0],
            0.0,
            10.0,
            |y| y[1],
            Direction::Falling,
            1e-11,
        )
        .unwrap();
        assert!((ev.t - PI / 2.0).abs() < 1e-9);
        assert_eq!(ev.direction, -1);
    }

    #[test]
    fn turning_point_is_not_a_crossing() {
        let r = integrate_to_section(duffing, [SQRT_2, 0.0], 0.0, 1.0, |y| y[1], Direction::Rising, 1e-10);
        assert!(matches!(r, Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn tangential_crossing_reported() {
        // the orbit of x' = 1 touches y = x² tangentially at x = 0
        let r = integrate_to_section(
            |_, _y: &[f64; 1]| [1.0],
            [-1.0],
            0.0,
            3.0,
            |y| -(y[0] * y[0]) + 1e-30,
            Direction::Either,
            1e-10,
        );
        assert!(matches!(r, Err(Error::TangentialCrossing { .. }) | Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(Dopri5::new(1e-2).is_err());
        assert!(Dopri5::new(1e-14).is_err());
    }

    #[test]
    fn blow_up_reported() {
        let r = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], (0.0, 2.0), 1e-8);
        assert!(r.is_err());
    }
}
