use std::f64::consts::TAU;

use rayon::prelude::*;
use tanglelab_core::dynamics::{
    bifurcation_scan, find_sinks, grid, invariant_curve, lyapunov, verify_full_shift, AnalyzerRegistry, CurveOptions,
    MapFamily, ScanBudget, ScanParam, ShiftOptions, ShiftStatus,
};
use tanglelab_core::homoclinic::{
    compute_loop, sample_orbit, shoot_gamma_with, splitting_distance_with, ClosedFormLoop, HomoclinicProfile,
    ShootingOptions,
};
use tanglelab_core::melnikov::{compute_a, compute_cs, e_of_s, k_of_s, Match, MelnikovConstants, Normalization};
use tanglelab_core::model::{convert, eigenvalues, Frame, PlanarState, SystemParams, XyChart};
use tanglelab_core::numerics::quad;
use tanglelab_core::presets::{preset, OmegaChoice, Preset, RhoChoice};
use tanglelab_core::regimes::{Classifier, Regime};
use tanglelab_core::retmap::{MapOutcome, ReducedMap};
use tanglelab_core::section::{compare_reduced, SectionSpec};

use crate::error::CliError;
use crate::output::{Cell, Report, Table};
use crate::{Cmd, PointArgs, ScanParamArg};

const DEFAULT_POINT: Preset = Preset {
    name: "default",
    summary: "",
    lambda: 0.05,
    epsilon: 0.05,
    mu: 1e-4,
    omega: OmegaChoice::Value(1.0),
    rho: RhoChoice::TimesC(1.5),
};

fn bad(msg: String) -> CliError {
    CliError::BadValue(msg)
}

fn check(ok: bool, what: &str, v: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(bad(format!("{what} = {v} out of range")))
    }
}

fn check_lambda(l: f64) -> Result<(), CliError> {
    check((0.0..=0.1).contains(&l), "lambda (allowed [0, 0.1])", l)
}

fn check_eps(e: f64) -> Result<(), CliError> {
    check(e > 0.0 && e <= 0.5, "eps (allowed (0, 0.5])", e)
}

fn check_count(n: usize, what: &str, max: usize) -> Result<(), CliError> {
    check(n >= 1 && n <= max, what, n)
}

struct Point {
    classifier: Classifier,
    preset: Preset,
    constants: MelnikovConstants,
    params: SystemParams,
    map: ReducedMap,
}

fn resolve(p: &PointArgs) -> Result<Point, CliError> {
    let mut pr = match &p.preset {
        Some(name) => *preset(name).map_err(|e| bad(e.to_string()))?,
        None => DEFAULT_POINT,
    };
    if let Some(l) = p.lambda {
        pr.lambda = l;
    }
    if let Some(e) = p.eps {
        pr.epsilon = e;
    }
    if let Some(m) = p.mu {
        pr.mu = m;
    }
    if let Some(w) = p.omega {
        pr.omega = OmegaChoice::Value(w);
    }
    match (p.rho, p.rho_c) {
        (Some(_), Some(_)) => return Err(bad("give at most one of --rho and --rho-c".into())),
        (Some(r), None) => pr.rho = RhoChoice::Value(r),
        (None, Some(f)) => pr.rho = RhoChoice::TimesC(f),
        (None, None) => {}
    }
    check(pr.lambda > 0.0 && pr.lambda <= 0.1, "lambda (allowed (0, 0.1])", pr.lambda)?;
    check_eps(pr.epsilon)?;
    check(pr.mu > 0.0 && pr.mu < pr.epsilon, "mu (allowed (0, eps))", pr.mu)?;
    if let OmegaChoice::Value(w) = pr.omega {
        check(w > 0.0 && w.is_finite(), "omega", w)?;
    }
    match pr.rho {
        RhoChoice::Value(r) | RhoChoice::TimesC(r) | RhoChoice::TimesRho0(r) => {
            check(r > 0.0 && r.is_finite(), "rho", r)?
        }
        RhoChoice::BandMidpoint => {}
    }
    if let Some(a) = p.a {
        check(a.is_finite(), "a", a)?;
    }
    let classifier = Classifier::new(pr.lambda, pr.epsilon)?;
    let r = pr.resolve_with(&classifier)?;
    let map = r.constants.reduced_map();
    let map = p.a.map_or(map, |a| map.with_a(a));
    Ok(Point { classifier, preset: pr, constants: r.constants, params: r.params, map })
}

fn point_fields(rep: &mut Report, pt: &Point) {
    if pt.preset.name != DEFAULT_POINT.name {
        rep.field("preset", pt.preset.name);
    }
    let c = &pt.constants;
    rep.field("lambda", c.lambda)
        .field("epsilon", c.epsilon)
        .field("mu", c.mu)
        .field("omega", c.omega)
        .field("rho", c.rho)
        .field("a", pt.map.a)
        .field("b", pt.map.b)
        .field("c", pt.map.c)
        .field("k", pt.map.k);
}

pub fn run(cmd: Cmd) -> Result<Report, CliError> {
    match cmd {
        Cmd::VerifyIntegrals { tol, .. } => verify_integrals(tol),
        Cmd::Gamma { lambda, tol, integrator_tol, .. } => gamma(lambda, tol, integrator_tol),
        Cmd::Orbit { lambda, eps, ds, span, .. } => orbit(lambda, eps, ds, span),
        Cmd::Constants { point, .. } => constants(&point),
        Cmd::Classify { point, grid, omega_from, omega_to, rho_from, rho_to, .. } => match grid {
            None => classify_point(&point),
            Some(n) => classify_grid(&point, n, (omega_from, omega_to), (rho_from, rho_to)),
        },
        Cmd::Iterate { point, theta, x, n_iter, .. } => iterate(&point, theta, x, n_iter),
        Cmd::Scan { point, param, from, to, steps, seed, n_iter, n_transient, .. } => {
            scan(&point, param, (from, to), steps, seed, n_iter, n_transient)
        }
        Cmd::Lyapunov { point, theta, x, n_iter, n_transient, .. } => lyap(&point, theta, x, n_iter, n_transient),
        Cmd::Curve { point, grid_n, tol, max_iter, .. } => curve(&point, grid_n, tol, max_iter),
        Cmd::ShiftCheck { point, w_max, samples_per_branch, x_slices, refine, .. } => {
            shift_check(&point, ShiftOptions { w_max, samples_per_branch, x_slices, x_range: None }, refine)
        }
        Cmd::Sinks { point, seeds, n_iter, .. } => sinks(&point, seeds, n_iter),
        Cmd::SectionCompare { point, samples, seed, .. } => section_compare(&point, samples, seed),
    }
}

fn verify_integrals(tol: f64) -> Result<Report, CliError> {
    check(tol >= 1e-11 && tol <= 1e-3, "tol (allowed [1e-11, 1e-3])", tol)?;
    let qtol = tol * 1e-2;
    let mut t = Table::new(&["check", "value", "reference", "error", "match", "pass"]);
    let mut all = true;
    let mut row = |t: &mut Table, name: String, v: f64, r: f64, m: &str, pass: bool| {
        all &= pass;
        t.push(vec![name.into(), v.into(), r.into(), (v - r).abs().into(), m.into(), pass.into()]);
    };

    let (mut worst, mut at) = (0.0f64, 0.0);
    for i in 0..=100 {
        let s = -5.0 + 0.1 * i as f64;
        let d = (k_of_s(s) + quad(e_of_s, 0.0, s, qtol)?).abs();
        if d > worst {
            (worst, at) = (d, s);
        }
    }
    let k_at = k_of_s(at);
    row(&mut t, "K closed form (worst of 101)".into(), k_at, k_at - worst, "", worst < tol);

    let a = compute_a(&ClosedFormLoop, Normalization::Symmetric, qtol)?;
    row(&mut t, "A".into(), a, 16.0 / 15.0, "", (a - 16.0 / 15.0).abs() < tol);

    let mut kinds = (Vec::new(), Vec::new());
    for w in [0.5, 1.0, 2.0, 5.0] {
        let r = compute_cs(w, &ClosedFormLoop, Normalization::Symmetric, qtol)?;
        let c_ok = r.c_match != Match::Neither && (r.c_match != Match::Both || r.c_stated == r.c_residue);
        let s_ok = matches!(r.s_match, Match::Stated | Match::Residue);
        let pick = |m: Match, stated: f64, residue: f64| if m == Match::Residue { residue } else { stated };
        row(&mut t, format!("C({w})"), r.c, pick(r.c_match, r.c_stated, r.c_residue), r.c_match.name(), c_ok);
        row(&mut t, format!("S({w})"), r.s, pick(r.s_match, r.s_stated, r.s_residue), r.s_match.name(), s_ok);
        kinds.0.push(r.c_match);
        kinds.1.push(r.s_match);
    }
    let same = |v: &[Match]| v.iter().all(|m| *m == v[0]);
    let consistent = same(&kinds.0) && same(&kinds.1);
    all &= consistent;

    let mut rep = Report::new("verify-integrals");
    rep.field("tol", tol).field("cs_consistent", consistent).field("all_pass", all);
    rep.table = Some(t);
    rep.verified = all;
    Ok(rep)
}

fn gamma(lambda: f64, tol: f64, integrator_tol: f64) -> Result<Report, CliError> {
    check_lambda(lambda)?;
    check(tol > 0.0 && tol < 1e-3, "tol", tol)?;
    check((1e-13..=1e-3).contains(&integrator_tol), "integrator-tol (allowed [1e-13, 1e-3])", integrator_tol)?;
    let o = ShootingOptions { tol: integrator_tol, ..Default::default() };
    let g = shoot_gamma_with(lambda, tol, &o)?;
    let (alpha, beta) = eigenvalues(lambda)?;
    let mut rep = Report::new("gamma");
    rep.field("lambda", lambda)
        .field("alpha", alpha)
        .field("beta", beta)
        .field("gamma_lambda", g)
        .field("bound", 10.0 * lambda)
        .field("splitting_at_gamma", splitting_distance_with(lambda, g, &o)?)
        .field("splitting_at_zero", splitting_distance_with(lambda, 0.0, &o)?)
        .field("integrator_tol", integrator_tol);
    Ok(rep)
}

fn orbit(lambda: f64, eps: f64, ds: f64, span: f64) -> Result<Report, CliError> {
    check_lambda(lambda)?;
    check_eps(eps)?;
    check(ds > 0.0 && ds <= 1.0, "ds (allowed (0, 1])", ds)?;
    check(span > 0.0 && span <= 50.0, "span (allowed (0, 50])", span)?;
    let data = if lambda > 0.0 {
        let g = shoot_gamma_with(lambda, 1e-12, &ShootingOptions::default())?;
        Some(sample_orbit(lambda, g, eps, ds.min(5e-3))?)
    } else {
        None
    };
    let p: &dyn HomoclinicProfile = match &data {
        Some(d) => d,
        None => &ClosedFormLoop,
    };
    let chart = if lambda == 0.0 { XyChart::Symmetric } else { XyChart::Eigen };
    let (lo, hi) = p.s_range();
    let (lo, hi) = (lo.max(-span), hi.min(span));
    let n = ((hi - lo) / ds).floor() as usize;
    let mut t = Table::new(&["s", "x", "y", "q", "p", "u", "v", "weight", "k"]);
    for i in 0..=n {
        let s = lo + ds * i as f64;
        let [x, y] = p.state(s);
        let [q, pp] = convert(&PlanarState::xy(x, y, chart), Frame::Qp, p.alpha()).coords;
        let [u, v] = p.tangent(s);
        t.push(vec![
            s.into(),
            x.into(),
            y.into(),
            q.into(),
            pp.into(),
            u.into(),
            v.into(),
            p.weight(s).into(),
            p.k(s).into(),
        ]);
    }
    let mut rep = Report::new("orbit");
    rep.field("lambda", lambda).field("gamma_lambda", p.gamma_lambda());
    if let Some(d) = &data {
        rep.field("L_minus", d.l_minus).field("L_plus", d.l_plus);
    }
    rep.table = Some(t);
    Ok(rep)
}

fn constants(p: &PointArgs) -> Result<Report, CliError> {
    let pt = resolve(p)?;
    let c = &pt.constants;
    let w = c.finite.window;
    let mut rep = Report::new("constants");
    if pt.preset.name != DEFAULT_POINT.name {
        rep.field("preset", pt.preset.name);
    }
    rep.field("lambda", c.lambda)
        .field("epsilon", c.epsilon)
        .field("mu", c.mu)
        .field("omega", c.omega)
        .field("rho", c.rho)
        .field("alpha", c.alpha)
        .field("beta", c.beta)
        .field("gamma_lambda", c.gamma_lambda)
        .field("A", c.a_full)
        .field("C", c.c_omega)
        .field("S", c.s_omega)
        .field("a", pt.map.a)
        .field("b", c.b)
        .field("c", c.c)
        .field("k", c.k)
        .field("P_L", c.finite.p_l)
        .field("P_L_plus", c.finite.p_l_plus)
        .field("L_minus", w.s_minus)
        .field("L_plus", w.s_plus)
        .field("A_L", c.finite.a_l)
        .field("c0", c.finite.c0)
        .field("rho0", pt.classifier.rho0());
    Ok(rep)
}

fn regime_fields(rep: &mut Report, r: &Regime) {
    rep.field("regime", r.tag.name())
        .field(
            "horseshoe",
            match r.tag {
                tanglelab_core::regimes::RegimeTag::RankOneBand { horseshoe } => Some(horseshoe),
                _ => None,
            },
        )
        .field("s_star", r.s_star.value)
        .field("s_star_band", r.s_star.band)
        .field("s", r.s)
        .field("rho0", r.rho0)
        .field("q", r.q)
        .field("margin_s_star", r.margin_s_star)
        .field("margin_s", r.margin_s)
        .field("margin_rho0", r.margin_rho0)
        .field("margin_q", r.margin_q);
}

fn classify_point(p: &PointArgs) -> Result<Report, CliError> {
    let pt = resolve(p)?;
    let r = pt.classifier.classify(pt.params.omega, pt.params.rho, pt.params.mu)?;
    let mut rep = Report::new("classify");
    point_fields(&mut rep, &pt);
    regime_fields(&mut rep, &r);
    Ok(rep)
}

fn classify_grid(
    p: &PointArgs,
    n: usize,
    omega: (Option<f64>, Option<f64>),
    rho: (Option<f64>, Option<f64>),
) -> Result<Report, CliError> {
    check_count(n, "grid (allowed [1, 1000])", 1000)?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| bad(format!("--grid needs --{name}")));
    let (w0, w1) = (need(omega.0, "omega-from")?, need(omega.1, "omega-to")?);
    let (r0, r1) = (need(rho.0, "rho-from")?, need(rho.1, "rho-to")?);
    check(w0 > 0.0 && w1 >= w0, "omega range", format!("[{w0}, {w1}]"))?;
    check(r0 > 0.0 && r1 >= r0, "rho range", format!("[{r0}, {r1}]"))?;
    let pt = resolve(p)?;
    let mu = pt.params.mu;
    let cells: Vec<(f64, f64)> =
        grid(w0, w1, n).into_iter().flat_map(|w| grid(r0, r1, n).into_iter().map(move |r| (w, r))).collect();
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&(w, r)| {
            let reg = pt.classifier.classify(w, r, mu)?;
            Ok(vec![
                w.into(),
                r.into(),
                reg.tag.name().into(),
                reg.s_star.value.into(),
                reg.s.into(),
                reg.q.into(),
                reg.margin_s_star.into(),
                reg.margin_s.into(),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(&["omega", "rho", "regime", "s_star", "s", "q", "margin_s_star", "margin_s"]);
    t.rows = rows;
    let mut rep = Report::new("classify");
    rep.field("lambda", pt.constants.lambda)
        .field("epsilon", pt.constants.epsilon)
        .field("mu", mu)
        .field("rho0", pt.classifier.rho0());
    rep.table = Some(t);
    Ok(rep)
}

fn iterate(p: &PointArgs, theta: f64, x: f64, n: usize) -> Result<Report, CliError> {
    check_count(n, "n-iter (allowed [1, 1e7])", 10_000_000)?;
    check(theta.is_finite() && x.is_finite(), "start point", format!("({theta}, {x})"))?;
    let pt = resolve(p)?;
    let mut t = Table::new(&["n", "theta", "x", "status"]);
    let (mut th, mut xx) = (theta.rem_euclid(TAU), x);
    t.push(vec![0usize.into(), th.into(), xx.into(), "start".into()]);
    let mut survived = 0;
    for i in 1..=n {
        let (status, next) = match pt.map.apply(th, xx) {
            MapOutcome::Next { theta, x } => ("next", Some((theta, x))),
            MapOutcome::RangeExit { theta, x } => ("range-exit", Some((theta, x))),
            MapOutcome::Escape { theta, .. } => ("escape", Some((theta, f64::NAN))),
        };
        let (a, b) = next.expect("set above");
        t.push(vec![i.into(), a.into(), b.into(), status.into()]);
        if status == "escape" {
            break;
        }
        survived = i;
        (th, xx) = (a, b);
    }
    let mut rep = Report::new("iterate");
    point_fields(&mut rep, &pt);
    rep.field("survived", survived);
    rep.table = Some(t);
    Ok(rep)
}

fn scan(
    p: &PointArgs,
    param: ScanParamArg,
    range: (f64, f64),
    steps: usize,
    seed: u64,
    n_iter: usize,
    n_transient: usize,
) -> Result<Report, CliError> {
    check_count(steps, "steps (allowed [1, 1e7])", 10_000_000)?;
    check_count(n_iter, "n-iter", 100_000_000)?;
    check(range.0.is_finite() && range.1.is_finite(), "range", format!("[{}, {}]", range.0, range.1))?;
    if param == ScanParamArg::Mu {
        check(range.0 > 0.0 && range.1 > 0.0, "mu range (must be positive)", format!("[{}, {}]", range.0, range.1))?;
    }
    let pt = resolve(p)?;
    let family = MapFamily { base: pt.map, mu0: pt.params.mu };
    let budget = ScanBudget { n_iter, n_transient, ..Default::default() };
    let (sp, name) = match param {
        ScanParamArg::A => (ScanParam::A, "a"),
        ScanParamArg::Mu => (ScanParam::Mu, "mu"),
    };
    let recs = bifurcation_scan(&family, sp, range, steps, &budget, seed, &AnalyzerRegistry::default())?;
    let mut t = Table::new(&[name, "outcome", "lyap1", "lyap2", "rotation", "period", "branches"]);
    for r in &recs {
        t.push(vec![
            r.param.into(),
            r.outcome.name().into(),
            r.lyap1.into(),
            r.lyap2.into(),
            r.rotation.into(),
            r.period.into(),
            r.branches.into(),
        ]);
    }
    let mut rep = Report::new("scan");
    point_fields(&mut rep, &pt);
    rep.field("param", name).field("seed", seed);
    rep.table = Some(t);
    Ok(rep)
}

fn lyap(p: &PointArgs, theta: f64, x: f64, n_iter: usize, n_transient: usize) -> Result<Report, CliError> {
    check_count(n_iter, "n-iter (allowed [1, 1e9])", 1_000_000_000)?;
    check(theta.is_finite() && x.is_finite(), "start point", format!("({theta}, {x})"))?;
    let pt = resolve(p)?;
    let l = lyapunov(&pt.map, (theta, x), n_iter, n_transient)?;
    let mut rep = Report::new("lyapunov");
    point_fields(&mut rep, &pt);
    rep.field("lyap1", l.l1)
        .field("lyap2", l.l2)
        .field("mean_log_det", l.mean_log_det)
        .field("sum_residual", l.l1 + l.l2 - l.mean_log_det)
        .field("iterations", l.iterations)
        .field("range_exits", l.range_exits);
    Ok(rep)
}

fn curve(p: &PointArgs, grid_n: usize, tol: f64, max_iter: usize) -> Result<Report, CliError> {
    check_count(grid_n, "grid-n (allowed [16, 1e6])", 1_000_000)?;
    check(grid_n >= 16, "grid-n (allowed [16, 1e6])", grid_n)?;
    check(tol > 0.0 && tol < 1e-2, "tol", tol)?;
    check_count(max_iter, "max-iter", 1_000_000)?;
    let pt = resolve(p)?;
    let o = CurveOptions { grid_n, tol, max_iter, ..Default::default() };
    let r = invariant_curve(&pt.map, &o)?;
    let mut rep = Report::new("curve");
    point_fields(&mut rep, &pt);
    let last = r.residuals.last().copied();
    let pass = r.cones.pass && r.induced_monotone;
    rep.field("iterations", r.residuals.len())
        .field("residual", last)
        .field("reapply_residual", r.reapply_residual)
        .field("residuals_decreasing", r.residuals_decreasing())
        .field("induced_monotone", r.induced_monotone)
        .field("rotation", r.rotation.map(|x| x.value))
        .field("rotation_error", r.rotation.map(|x| x.error))
        .field("cone_slope_max", r.cones.slope_max)
        .field("forward_expansion_min", r.cones.forward_min)
        .field("backward_expansion_min", r.cones.backward_min)
        .field("cones_pass", r.cones.pass)
        .field("worst_theta", r.cones.worst_theta);
    let mut t = Table::new(&["theta", "x", "induced"]);
    for i in 0..r.theta.len() {
        t.push(vec![r.theta[i].into(), r.g[i].into(), r.induced[i].into()]);
    }
    rep.table = Some(t);
    rep.verified = pass;
    Ok(rep)
}

fn shift_check(p: &PointArgs, o: ShiftOptions, refine: usize) -> Result<Report, CliError> {
    check_count(o.w_max, "w-max (allowed [1, 10000])", 10_000)?;
    check_count(o.samples_per_branch, "samples-per-branch (allowed [2, 1e6])", 1_000_000)?;
    check(o.samples_per_branch >= 2, "samples-per-branch", o.samples_per_branch)?;
    check_count(o.x_slices, "x-slices (allowed [1, 1000])", 1000)?;
    check_count(refine, "refine (allowed [1, 100])", 100)?;
    let pt = resolve(p)?;
    let o = if refine > 1 { o.refined(refine) } else { o };
    let r = verify_full_shift(&pt.map, &o);
    let status = match r.status {
        ShiftStatus::Pass => "pass",
        ShiftStatus::Fail => "fail",
        ShiftStatus::NotApplicable => "not-applicable",
    };
    let mut rep = Report::new("shift-check");
    point_fields(&mut rep, &pt);
    rep.field("status", status)
        .field("branches", r.branches)
        .field("partial_branches", r.partial_branches)
        .field("truncated", r.truncated)
        .field("fold_margin", r.fold_margin)
        .field("expansion_min", r.expansion_min)
        .field("expansion_margin", r.expansion_margin)
        .field("slice_fold_margin", r.slice_fold_margin)
        .field("horizontal_expansion", r.horizontal_expansion)
        .field("cone_slope", r.cone_slope)
        .field("vertical_contraction", r.vertical_contraction)
        .field("vertical_bound", r.vertical_bound)
        .field("samples_per_branch", o.samples_per_branch)
        .field("x_slices", o.x_slices);
    rep.verified = r.status != ShiftStatus::Fail;
    Ok(rep)
}

fn sinks(p: &PointArgs, seeds: usize, n_iter: usize) -> Result<Report, CliError> {
    check_count(seeds, "seeds (allowed [1, 1e5])", 100_000)?;
    check_count(n_iter, "n-iter (allowed [1, 1e7])", 10_000_000)?;
    let pt = resolve(p)?;
    let thetas: Vec<f64> = (0..seeds).map(|i| TAU * i as f64 / seeds as f64).collect();
    let found = find_sinks(&pt.map, &thetas, n_iter);
    let mut t = Table::new(&["period", "multiplier1", "multiplier2", "det_product", "basin", "theta", "x"]);
    for s in &found {
        let (th, x) = s.orbit[0];
        t.push(vec![
            s.period.into(),
            s.multipliers[0].into(),
            s.multipliers[1].into(),
            s.det_product.into(),
            s.basin.into(),
            th.into(),
            x.into(),
        ]);
    }
    let mut rep = Report::new("sinks");
    point_fields(&mut rep, &pt);
    rep.field("seeds", seeds).field("found", found.len());
    rep.table = Some(t);
    Ok(rep)
}

fn section_compare(p: &PointArgs, samples: usize, seed: u64) -> Result<Report, CliError> {
    check_count(samples, "samples (allowed [1, 1e6])", 1_000_000)?;
    let pt = resolve(p)?;
    let par = pt.params;
    let spec = SectionSpec::new(compute_loop(par.lambda, par.epsilon)?, par.epsilon)?;
    let c = compare_reduced(&par, &spec, samples, seed)?;
    let mut rep = Report::new("section-compare");
    point_fields(&mut rep, &pt);
    rep.field("rho_over_c", par.rho / pt.constants.c)
        .field("samples", c.samples)
        .field("seed", seed)
        .field("both_returned", c.both_returned)
        .field("theta_err_median", c.theta_err_median)
        .field("theta_err_max", c.theta_err_max)
        .field("lnx_err_median", c.lnx_err_median)
        .field("lnx_err_max", c.lnx_err_max)
        .field("escape_agreement", c.escape_agreement)
        .field("k1_exceeded", c.k1_exceeded)
        .field("failures", c.failures);
    Ok(rep)
}
