//! The saddle connection of the unforced dissipative system: shooting for γ_λ,
//! sampling the loop ℓ_λ, and the Diophantine check on (α, β).

use crate::error::{Error, Result};
use crate::melnikov::{e_of_s, k_of_s};
use crate::model::{
    autonomous_jacobian, eigenvalues, qp_vector_to_eigen, unperturbed_orbit, unperturbed_tangent,
    vector_field_autonomous,
};
use crate::numerics::{find_root, Direction, Dopri5, Event};

/// Read-only access to a homoclinic loop parameterized by time s, s = 0 at the
/// apex, in the eigen chart (x stable, y unstable).
pub trait HomoclinicProfile: Send + Sync {
    fn alpha(&self) -> f64;
    fn beta(&self) -> f64;
    fn gamma_lambda(&self) -> f64;
    /// Interval on which the profile is defined.
    fn s_range(&self) -> (f64, f64);
    fn state(&self, s: f64) -> [f64; 2];
    /// Unit tangent (u, v).
    fn tangent(&self, s: f64) -> [f64; 2];
    /// Normal growth rate E(s).
    fn weight(&self, s: f64) -> f64;
    /// K(s) = −∫₀ˢ E.
    fn k(&self, s: f64) -> f64;
}

/// Integration window [−s_minus, s_plus] around the apex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub s_minus: f64,
    pub s_plus: f64,
}

/// First |s| (scanning outward from the apex on the given side) where `g` changes sign.
fn outward_root(g: impl Fn(f64) -> f64, side: f64, s_max: f64) -> Result<f64> {
    let h = 0.02;
    let mut a = 0.0;
    let mut ga = g(0.0);
    while a < s_max {
        let b = (a + h).min(s_max);
        let gb = g(side * b);
        if ga.signum() != gb.signum() {
            return find_root(|s| g(side * s), a, b, 1e-13);
        }
        a = b;
        ga = gb;
    }
    Err(Error::InvalidParameter(format!("level not reached within |s| <= {s_max}")))
}

fn side_limit(p: &dyn HomoclinicProfile, side: f64) -> f64 {
    let (lo, hi) = p.s_range();
    let lim = if side < 0.0 { -lo } else { hi };
    lim.min(200.0)
}

/// Times at which the loop enters the ball of radius ε/2 (L⁻ backward, L⁺ forward).
pub fn ball_window(p: &dyn HomoclinicProfile, epsilon: f64) -> Result<Window> {
    let r = 0.5 * epsilon;
    let g = |s: f64| {
        let [x, y] = p.state(s);
        x.hypot(y) - r
    };
    Ok(Window {
        s_minus: outward_root(&g, -1.0, side_limit(p, -1.0))?,
        s_plus: outward_root(&g, 1.0, side_limit(p, 1.0))?,
    })
}

/// Times at which the loop meets the sections {y = ε} (backward) and {x = ε} (forward).
pub fn section_window(p: &dyn HomoclinicProfile, epsilon: f64) -> Result<Window> {
    Ok(Window {
        s_minus: outward_root(|s| p.state(s)[1] - epsilon, -1.0, side_limit(p, -1.0))?,
        s_plus: outward_root(|s| p.state(s)[0] - epsilon, 1.0, side_limit(p, 1.0))?,
    })
}

/// The conservative loop (λ = γ = 0) in closed form.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormLoop;

impl HomoclinicProfile for ClosedFormLoop {
    fn alpha(&self) -> f64 {
        1.0
    }
    fn beta(&self) -> f64 {
        1.0
    }
    fn gamma_lambda(&self) -> f64 {
        0.0
    }
    fn s_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn state(&self, s: f64) -> [f64; 2] {
        unperturbed_orbit(s).coords
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        unperturbed_tangent(s)
    }
    fn weight(&self, s: f64) -> f64 {
        e_of_s(s)
    }
    fn k(&self, s: f64) -> f64 {
        k_of_s(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Distance of the manifold seeds from the saddle.
    pub seed: f64,
    pub tol: f64,
    pub t_max: f64,
    /// Half-width of the working box in q and p.
    pub box_size: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { seed: 1e-8, tol: 1e-12, t_max: 100.0, box_size: 10.0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    /// Time from the seed to the apex crossing (negative for the stable branch).
    t_cross: f64,
    q_cross: f64,
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

// The manifolds leave the saddle tangent to the eigenvectors; the nonlinearity is
// cubic, so the linear seed is already correct to O(δ³).
fn seeds(lambda: f64, seed: f64) -> ([f64; 2], [f64; 2]) {
    let (alpha, beta) = eigenvalues(lambda).expect("validated");
    let eu = unit([1.0, beta]);
    let es = unit([1.0, -alpha]);
    ([seed * eu[0], seed * eu[1]], [seed * es[0], seed * es[1]])
}

fn run_branch(lambda: f64, gamma: f64, y0: [f64; 2], backward: bool, o: &ShootingOptions) -> Result<Branch> {
    let solver = Dopri5::new(o.tol)?;
    let field = |_: f64, y: &[f64; 2]| vector_field_autonomous(y[0], y[1], lambda, gamma);
    let apex = |y: &[f64; 2]| y[1];
    let bx = o.box_size;
    let inside = move |y: &[f64; 2]| bx - y[0].abs().max(y[1].abs());
    // traversing the unstable branch forward p falls through 0 at the apex; the
    // stable branch traversed backward sees p rise through 0
    let dir = if backward { Direction::Rising } else { Direction::Falling };
    let events = [Event { g: &apex, direction: dir }, Event { g: &inside, direction: Direction::Falling }];
    let t_end = if backward { -o.t_max } else { o.t_max };
    let hit = solver.first_event(field, 0.0, y0, t_end, &events)?;
    if hit.index == 1 {
        return Err(Error::LeftBox { t: hit.event.t });
    }
    Ok(Branch { t_cross: hit.event.t, q_cross: hit.event.state[0] })
}

fn check_lambda(lambda: f64, hi: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= hi) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside (0, {hi}]")));
    }
    Ok(())
}

/// q-offset between the unstable and stable manifolds of the origin on {p = 0};
/// zero iff the two coincide. Negative when damping wins (γ too small).
pub fn splitting_distance(lambda: f64, gamma: f64) -> Result<f64> {
    splitting_distance_with(lambda, gamma, &ShootingOptions::default())
}

pub fn splitting_distance_with(lambda: f64, gamma: f64, o: &ShootingOptions) -> Result<f64> {
    if !(lambda >= 0.0 && lambda < 0.3) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside [0, 0.3)")));
    }
    let (su, ss) = seeds(lambda, o.seed);
    let u = run_branch(lambda, gamma, su, false, o)?;
    let s = run_branch(lambda, gamma, ss, true, o)?;
    Ok(u.q_cross - s.q_cross)
}

/// γ_λ such that the loop closes, searched in |γ| < 10λ.
pub fn shoot_gamma(lambda: f64, tol: f64) -> Result<f64> {
    shoot_gamma_with(lambda, tol, &ShootingOptions::default())
}

pub fn shoot_gamma_with(lambda: f64, tol: f64, o: &ShootingOptions) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    check_lambda(lambda, 0.1)?;
    let bound = 10.0 * lambda;
    let d0 = splitting_distance_with(lambda, 0.0, o)?;
    if d0 == 0.0 {
        return Ok(0.0);
    }
    // d increases with γ (the cubic damping term feeds energy in), so walk toward
    // the side that can cancel d0
    let side = if d0 < 0.0 { 1.0 } else { -1.0 };
    let n = 16;
    let (mut g_prev, mut d_prev) = (0.0, d0);
    for k in 1..=n {
        let g = side * bound * k as f64 / n as f64;
        let g = if k == n { g * (1.0 - 1e-9) } else { g };
        let d = match splitting_distance_with(lambda, g, o) {
            Ok(d) => d,
            Err(_) => break,
        };
        if d.signum() != d_prev.signum() {
            let root = find_root(|gm| splitting_distance_with(lambda, gm, o).unwrap_or(f64::NAN), g_prev, g, tol)?;
            if root.abs() >= bound {
                return Err(Error::NoBracket { lo: g_prev, hi: g, d_lo: d_prev, d_hi: d });
            }
            return Ok(root);
        }
        g_prev = g;
        d_prev = d;
    }
    Err(Error::NoBracket { lo: 0.0, hi: side * bound, d_lo: d0, d_hi: d_prev })
}

#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    pub shooting: ShootingOptions,
    /// The grid covers [−s_max, s_max].
    pub s_max: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { shooting: ShootingOptions::default(), s_max: 30.0 }
    }
}

const GL5_X: [f64; 5] = [
    -0.906179845938663992797626878299392,
    -0.538469310105683091036314420700208,
    0.0,
    0.538469310105683091036314420700208,
    0.906179845938663992797626878299392,
];
const GL5_W: [f64; 5] = [
    0.236926885056189087514264040719917,
    0.478628670499366468041291514835638,
    0.568888888888888888888888888888889,
    0.478628670499366468041291514835638,
    0.236926885056189087514264040719917,
];

/// The loop ℓ_λ sampled on a uniform time grid, in the eigen chart, with
/// Hermite interpolation between nodes.
#[derive(Debug, Clone)]
pub struct HomoclinicData {
    pub lambda: f64,
    pub gamma_lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub s0: f64,
    pub ds: f64,
    pub ell: Vec<[f64; 2]>,
    pub velocity: Vec<[f64; 2]>,
    pub tangent: Vec<[f64; 2]>,
    pub weight: Vec<f64>,
    k_nodes: Vec<f64>,
    pub l_minus: f64,
    pub l_plus: f64,
    /// Gap between the two manifold branches at the apex.
    pub apex_gap: f64,
}

/// Exact Jacobian of the unforced field in the eigen chart.
fn eigen_jacobian(q: f64, p: f64, lambda: f64, gamma: f64, alpha: f64) -> [[f64; 2]; 2] {
    let j = autonomous_jacobian(q, p, lambda, gamma);
    // xy = T·qp with T = [[1, −α], [α, 1]]/(1+α²); qp = T⁻¹·xy with T⁻¹ = [[1, α], [−α, 1]]
    let n = 1.0 + alpha * alpha;
    let t = [[1.0 / n, -alpha / n], [alpha / n, 1.0 / n]];
    let ti = [[1.0, alpha], [-alpha, 1.0]];
    let mut jt = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            jt[r][c] = j[r][0] * ti[0][c] + j[r][1] * ti[1][c];
        }
    }
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = t[r][0] * jt[0][c] + t[r][1] * jt[1][c];
        }
    }
    out
}

impl HomoclinicData {
    fn qp(&self, xy: [f64; 2]) -> [f64; 2] {
        [xy[0] + self.alpha * xy[1], -self.alpha * xy[0] + xy[1]]
    }

    fn field_xy(&self, xy: [f64; 2]) -> [f64; 2] {
        let [q, p] = self.qp(xy);
        qp_vector_to_eigen(vector_field_autonomous(q, p, self.lambda, self.gamma_lambda), self.alpha)
    }

    /// E = n·J n with n = (v, −u) the unit normal.
    fn weight_at_state(&self, xy: [f64; 2]) -> f64 {
        let [u, v] = unit(self.field_xy(xy));
        let [q, p] = self.qp(xy);
        let j = eigen_jacobian(q, p, self.lambda, self.gamma_lambda, self.alpha);
        v * v * j[0][0] + u * u * j[1][1] - u * v * (j[0][1] + j[1][0])
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.ell.len()).map(move |i| self.s0 + i as f64 * self.ds)
    }

    fn cell(&self, s: f64) -> (usize, f64) {
        let n = self.ell.len();
        let x = ((s - self.s0) / self.ds).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        (i, x - i as f64)
    }

    fn hermite(&self, s: f64) -> [f64; 2] {
        let (i, t) = self.cell(s);
        let h = self.ds;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let (y0, y1, m0, m1) = (self.ell[i], self.ell[i + 1], self.velocity[i], self.velocity[i + 1]);
        std::array::from_fn(|k| h00 * y0[k] + h10 * h * m0[k] + h01 * y1[k] + h11 * h * m1[k])
    }

    fn weight_integral(&self, a: f64, b: f64) -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        (0..5).map(|j| GL5_W[j] * self.weight_at_state(self.hermite(c + r * GL5_X[j]))).sum::<f64>() * r
    }

    /// Max relative misfit of log|ℓ| to the linear decay rates β (s → −∞) and
    /// α (s → +∞) on the tails beyond the ball window.
    pub fn tail_rates(&self) -> (f64, f64) {
        let fit = |a: f64, b: f64| {
            let la = self.hermite(a);
            let lb = self.hermite(b);
            (lb[0].hypot(lb[1]).ln() - la[0].hypot(la[1]).ln()) / (b - a)
        };
        let s_end = -self.s0;
        (fit(-s_end + 1.0, -self.l_minus - 1.0), -fit(self.l_plus + 1.0, s_end - 1.0))
    }
}

impl HomoclinicProfile for HomoclinicData {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn beta(&self) -> f64 {
        self.beta
    }
    fn gamma_lambda(&self) -> f64 {
        self.gamma_lambda
    }
    fn s_range(&self) -> (f64, f64) {
        (self.s0, self.s0 + (self.ell.len() - 1) as f64 * self.ds)
    }
    fn state(&self, s: f64) -> [f64; 2] {
        self.hermite(s)
    }
    fn tangent(&self, s: f64) -> [f64; 2] {
        unit(self.field_xy(self.hermite(s)))
    }
    fn weight(&self, s: f64) -> f64 {
        self.weight_at_state(self.hermite(s))
    }
    fn k(&self, s: f64) -> f64 {
        let (i, _) = self.cell(s);
        let si = self.s0 + i as f64 * self.ds;
        self.k_nodes[i] - self.weight_integral(si, s)
    }
}

/// Shoot for γ_λ and sample the loop on the default grid (ds = 5e-3).
pub fn compute_loop(lambda: f64, epsilon: f64) -> Result<HomoclinicData> {
    let g = shoot_gamma(lambda, 1e-12)?;
    sample_orbit(lambda, g, epsilon, 5e-3)
}

/// Sample ℓ_λ with spacing ds; γ_λ must be the connecting value (0 at λ = 0).
pub fn sample_orbit(lambda: f64, gamma_lambda: f64, epsilon: f64, ds: f64) -> Result<HomoclinicData> {
    sample_orbit_with(lambda, gamma_lambda, epsilon, ds, &SampleOptions::default())
}

pub fn sample_orbit_with(
    lambda: f64,
    gamma_lambda: f64,
    epsilon: f64,
    ds: f64,
    o: &SampleOptions,
) -> Result<HomoclinicData> {
    if !(ds > 0.0 && ds <= 0.1) {
        return Err(Error::InvalidParameter(format!("ds = {ds} outside (0, 0.1]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    if !(0.0..=0.1).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside [0, 0.1]")));
    }
    let (alpha, beta) = eigenvalues(lambda)?;
    let sh = &o.shooting;
    let (su, ss) = seeds(lambda, sh.seed);
    let bu = run_branch(lambda, gamma_lambda, su, false, sh)?;
    let bs = run_branch(lambda, gamma_lambda, ss, true, sh)?;
    let solver = Dopri5::new(sh.tol)?;
    let field = |_: f64, y: &[f64; 2]| vector_field_autonomous(y[0], y[1], lambda, gamma_lambda);
    let tu = solver.integrate(field, 0.0, su, bu.t_cross)?;
    let ts = solver.integrate(field, 0.0, ss, bs.t_cross)?;
    let apex_gap = {
        let a = tu.last_state();
        let b = ts.last_state();
        (a[0] - b[0]).hypot(a[1] - b[1])
    };
    let eu = unit([1.0, beta]);
    let es = unit([1.0, -alpha]);

    let half = (o.s_max / ds).round() as usize;
    let ds = o.s_max / half as f64;
    let n = 2 * half + 1;
    let s0 = -(half as f64) * ds;
    let mut ell = Vec::with_capacity(n);
    for i in 0..n {
        let s = s0 + i as f64 * ds;
        let qp = if i <= half {
            let t = bu.t_cross + s;
            if t >= 0.0 {
                tu.eval(t.min(bu.t_cross)).expect("inside span")
            } else {
                let r = sh.seed * (beta * t).exp();
                [r * eu[0], r * eu[1]]
            }
        } else {
            let t = bs.t_cross + s;
            if t <= 0.0 {
                ts.eval(t.max(bs.t_cross)).expect("inside span")
            } else {
                let r = sh.seed * (-alpha * t).exp();
                [r * es[0], r * es[1]]
            }
        };
        ell.push(qp_vector_to_eigen(qp, alpha));
    }
    let mut data = HomoclinicData {
        lambda,
        gamma_lambda,
        alpha,
        beta,
        epsilon,
        s0,
        ds,
        ell,
        velocity: Vec::new(),
        tangent: Vec::new(),
        weight: Vec::new(),
        k_nodes: Vec::new(),
        l_minus: f64::NAN,
        l_plus: f64::NAN,
        apex_gap,
    };
    data.velocity = data.ell.iter().map(|&xy| data.field_xy(xy)).collect();
    data.tangent = data.velocity.iter().map(|&v| unit(v)).collect();
    data.weight = data.ell.iter().map(|&xy| data.weight_at_state(xy)).collect();
    let mut k = vec![0.0; n];
    for i in half + 1..n {
        let a = s0 + (i - 1) as f64 * ds;
        k[i] = k[i - 1] - data.weight_integral(a, a + ds);
    }
    for i in (0..half).rev() {
        let a = s0 + i as f64 * ds;
        k[i] = k[i + 1] + data.weight_integral(a, a + ds);
    }
    data.k_nodes = k;
    let w = ball_window(&data, epsilon)?;
    data.l_minus = w.s_minus;
    data.l_plus = w.s_plus;
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonResonanceConfig {
    pub d1: f64,
    pub d2: f64,
    pub n_max: usize,
}

impl NonResonanceConfig {
    pub fn new(d1: f64, d2: f64, n_max: usize) -> Result<Self> {
        if !(d1 > 0.0 && d2 > 0.0 && n_max >= 100) {
            return Err(Error::InvalidParameter("need d1 > 0, d2 > 0, n_max >= 100".into()));
        }
        Ok(NonResonanceConfig { d1, d2, n_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonResonanceReport {
    pub pass: bool,
    pub worst: (u64, u64),
    /// min over pairs of |nα − mβ| − d1 (n+m)^{−d2}.
    pub margin: f64,
}

/// Exhaustive check of |nα − mβ| > d1 (n+m)^{−d2} over n, m ≥ 1, n+m ≤ n_max.
pub fn check_nonresonance(alpha: f64, beta: f64, cfg: &NonResonanceConfig) -> NonResonanceReport {
    let mut worst = (1, 1);
    let mut margin = f64::INFINITY;
    for n in 1..cfg.n_max as u64 {
        let na = n as f64 * alpha;
        for m in 1..=(cfg.n_max as u64 - n) {
            let gap = (na - m as f64 * beta).abs() - cfg.d1 * ((n + m) as f64).powf(-cfg.d2);
            if gap < margin {
                margin = gap;
                worst = (n, m);
            }
        }
    }
    NonResonanceReport { pass: margin > 0.0, worst, margin }
}
