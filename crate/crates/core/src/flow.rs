//! The ODE systems: the structure-field flow on the unit sphere, full
//! geodesics (exponential map), the backward symmetric flowline with its
//! endpoint coordinates `(a, b)`, and the variational system in `x0`.

use serde::Serialize;

use crate::algebra::{group_mul, structure_field_raw, Alpha, GroupPoint, SphereState, Vec3};
use crate::error::{domain, Error, Result};
use crate::ode::{self, Crossing, IntegratorConfig, Trajectory};

/// Unit-speed geodesic state: base point and direction in the frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    pub pos: GroupPoint,
    pub dir: SphereState,
}

impl GeodesicState {
    pub fn at_identity(dir: SphereState) -> Self {
        GeodesicState { pos: GroupPoint::IDENTITY, dir }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.pos.x, self.pos.y, self.pos.z, self.dir.u1, self.dir.u2, self.dir.u3]
    }

    pub fn from_array(s: &[f64; 6]) -> Self {
        GeodesicState { pos: GroupPoint::new(s[0], s[1], s[2]), dir: SphereState::raw([s[3], s[4], s[5]]) }
    }
}

/// A point of the backward symmetric flowline together with the endpoint
/// coordinates of the corresponding symmetric geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymFlowState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub a: f64,
    pub b: f64,
}

impl SymFlowState {
    pub fn from_array(s: &[f64; 5]) -> Self {
        SymFlowState { x: s[0], y: s[1], z: s[2], a: s[3], b: s[4] }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x, self.y, self.z, self.a, self.b]
    }

    pub fn aprime(&self) -> f64 {
        2.0 * self.x + self.a * self.z
    }

    pub fn bprime(&self, alpha: Alpha) -> f64 {
        2.0 * self.y - alpha.get() * self.b * self.z
    }

    /// `z'` along the backward flow, `x² - alpha y²`.
    pub fn zprime(&self, alpha: Alpha) -> f64 {
        self.x * self.x - alpha.get() * self.y * self.y
    }

    /// `a x - alpha b y - 2 z`, identically zero along the flow.
    pub fn reciprocity_residual(&self, alpha: Alpha) -> f64 {
        self.a * self.x - alpha.get() * self.b * self.y - 2.0 * self.z
    }

    pub fn sphere_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// [`SymFlowState`] plus the derivatives of every component in `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarFlowState {
    pub sym: SymFlowState,
    pub xbar: f64,
    pub ybar: f64,
    pub zbar: f64,
    pub abar: f64,
    pub bbar: f64,
}

impl VarFlowState {
    pub fn from_array(s: &[f64; 10]) -> Self {
        VarFlowState {
            sym: SymFlowState { x: s[0], y: s[1], z: s[2], a: s[3], b: s[4] },
            xbar: s[5],
            ybar: s[6],
            zbar: s[7],
            abar: s[8],
            bbar: s[9],
        }
    }

    pub fn bars(&self) -> [f64; 5] {
        [self.xbar, self.ybar, self.zbar, self.abar, self.bbar]
    }

    /// `x xbar + y ybar + z zbar`, the derivative of the sphere constraint.
    pub fn constraint_residual(&self) -> f64 {
        let s = &self.sym;
        s.x * self.xbar + s.y * self.ybar + s.z * self.zbar
    }

    /// `x abar + y bbar`.
    pub fn endpoint_residual(&self) -> f64 {
        self.sym.x * self.abar + self.sym.y * self.bbar
    }
}

/// Integral curve of the structure field from `s0`.
pub fn flow_sphere(s0: SphereState, t_end: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<Trajectory<3>> {
    let a = alpha.get();
    ode::solve(move |_t, u: &Vec3| structure_field_raw(u, a), 0.0, s0.to_array(), t_end, cfg)
}

#[inline]
fn geodesic_rhs(s: &[f64; 6], a: f64) -> [f64; 6] {
    let z = s[2];
    let f = structure_field_raw(&[s[3], s[4], s[5]], a);
    [s[3] * z.exp(), s[4] * (-a * z).exp(), s[5], f[0], f[1], f[2]]
}

/// Unit-speed geodesic from `g0`, integrated for time `t_end` (negative
/// values run backwards). State layout `[x, y, z, u1, u2, u3]`.
pub fn geodesic(g0: GeodesicState, t_end: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<Trajectory<6>> {
    let a = alpha.get();
    ode::solve(move |_t, s: &[f64; 6]| geodesic_rhs(s, a), 0.0, g0.to_array(), t_end, cfg)
}

/// Riemannian exponential map at the identity.
pub fn exp_map(v: Vec3, alpha: Alpha, cfg: &IntegratorConfig) -> Result<GroupPoint> {
    let t = crate::algebra::norm(&v);
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain("|v|", t, "(0, inf)"));
    }
    let dir = SphereState::from_direction(v)?;
    let traj = geodesic(GeodesicState::at_identity(dir), t, alpha, &cfg.without_dense())?;
    let s = traj.last();
    Ok(GroupPoint::new(s[0], s[1], s[2]))
}

/// Endpoint of the geodesic with initial vector `v` as the ordered product
/// `(eps u(t_0)) * ... * (eps u(t_n))` over `n + 1` equally spaced points of
/// the flowline, `eps = |v| / (n + 1)`. Converges to [`exp_map`] at rate
/// `O(1/n)`.
pub fn exp_map_concat(v: Vec3, n_steps: usize, alpha: Alpha, cfg: &IntegratorConfig) -> Result<GroupPoint> {
    if n_steps == 0 {
        return Err(domain("n_steps", 0.0, "[1, inf)"));
    }
    let t_total = crate::algebra::norm(&v);
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(domain("|v|", t_total, "(0, inf)"));
    }
    let dir = SphereState::from_direction(v)?;
    let mut dense = *cfg;
    dense.dense_output = true;
    let traj = flow_sphere(dir, t_total, alpha, &dense)?;
    let eps = t_total / (n_steps as f64 + 1.0);
    let mut acc = GroupPoint::IDENTITY;
    for j in 0..=n_steps {
        let t = t_total * j as f64 / n_steps as f64;
        let u = traj.eval(t).ok_or(Error::Integrator { t_reached: t, reason: "dense output unavailable" })?;
        acc = group_mul(acc, GroupPoint::new(eps * u[0], eps * u[1], eps * u[2]), alpha);
    }
    Ok(acc)
}

/// Checks `alpha ∈ (0, 1]` and `x0 ∈ (sqrt(alpha/(1+alpha)), 1)`.
pub fn check_loop_start(x0: f64, alpha: Alpha) -> Result<()> {
    alpha.require_positive()?;
    let lo = alpha.equilibrium_x();
    if !(x0 > lo && x0 < 1.0) {
        return Err(domain("x0", x0, "(sqrt(alpha/(1+alpha)), 1)"));
    }
    Ok(())
}

#[inline]
fn symmetric_rhs(s: &[f64; 5], a: f64) -> [f64; 5] {
    let [x, y, z, pa, pb] = *s;
    [-x * z, a * y * z, x * x - a * y * y, 2.0 * x + pa * z, 2.0 * y - a * pb * z]
}

#[inline]
fn variational_rhs(s: &[f64; 10], al: f64) -> [f64; 10] {
    let [x, y, z, a, b, xb, yb, zb, ab, bb] = *s;
    [
        -x * z,
        al * y * z,
        x * x - al * y * y,
        2.0 * x + a * z,
        2.0 * y - al * b * z,
        -x * zb - z * xb,
        al * y * zb + al * z * yb,
        2.0 * x * xb - 2.0 * al * y * yb,
        2.0 * xb + z * ab + a * zb,
        2.0 * yb - al * z * bb - al * b * zb,
    ]
}

/// Initial point `(x0, sqrt(1 - x0²), 0, 0, 0)` of the symmetric system.
pub fn symmetric_start(x0: f64) -> [f64; 5] {
    [x0, (1.0 - x0 * x0).sqrt(), 0.0, 0.0, 0.0]
}

/// Initial point of the variational system: the symmetric start plus
/// `xbar = 1`, `ybar = -x0 / sqrt(1 - x0²)`, the other bars zero.
pub fn variational_start(x0: f64) -> [f64; 10] {
    let y0 = (1.0 - x0 * x0).sqrt();
    [x0, y0, 0.0, 0.0, 0.0, 1.0, -x0 / y0, 0.0, 0.0, 0.0]
}

/// Generous integration horizon when searching for the half period.
pub const HALF_PERIOD_SEARCH: f64 = 1e4;

/// Backward symmetric flowline with the half period, if reached.
#[derive(Debug, Clone)]
pub struct SymFlow {
    pub traj: Trajectory<5>,
    /// First positive time at which `z` returns to zero.
    pub half_period: Option<f64>,
    pub at_half_period: Option<SymFlowState>,
}

impl SymFlow {
    pub fn state_at(&self, t: f64) -> Option<SymFlowState> {
        self.traj.eval(t).map(|s| SymFlowState::from_array(&s))
    }
}

#[derive(Debug, Clone)]
pub struct VarFlow {
    pub traj: Trajectory<10>,
    pub half_period: Option<f64>,
    pub at_half_period: Option<VarFlowState>,
}

impl VarFlow {
    pub fn state_at(&self, t: f64) -> Option<VarFlowState> {
        self.traj.eval(t).map(|s| VarFlowState::from_array(&s))
    }
}

/// Integrates the backward symmetric system from `(x0, sqrt(1-x0²), 0)` to
/// `t_end`, recording the half period `rho` when it falls inside the span.
pub fn flow_symmetric(x0: f64, t_end: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<SymFlow> {
    check_loop_start(x0, alpha)?;
    let a = alpha.get();
    let (traj, events) = ode::solve_with_events(
        move |_t, s: &[f64; 5]| symmetric_rhs(s, a),
        0.0,
        symmetric_start(x0),
        t_end,
        cfg,
        |_t, s| s[2],
        Crossing::Falling,
    )?;
    let first = events.first();
    Ok(SymFlow { traj, half_period: first.map(|e| e.t), at_half_period: first.map(|e| SymFlowState::from_array(&e.y)) })
}

/// Integrates the symmetric system exactly up to the half period.
pub fn symmetric_to_half_period(
    x0: f64,
    alpha: Alpha,
    cfg: &IntegratorConfig,
) -> Result<(f64, SymFlowState, Trajectory<5>)> {
    check_loop_start(x0, alpha)?;
    let a = alpha.get();
    let (traj, ev) = ode::solve_until(
        move |_t, s: &[f64; 5]| symmetric_rhs(s, a),
        0.0,
        symmetric_start(x0),
        HALF_PERIOD_SEARCH,
        cfg,
        |_t, s| s[2],
        Crossing::Falling,
    )?;
    Ok((ev.t, SymFlowState::from_array(&ev.y), traj))
}

/// Integrates the 10-dimensional variational system to `t_end`.
pub fn flow_variational(x0: f64, t_end: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<VarFlow> {
    check_loop_start(x0, alpha)?;
    let a = alpha.get();
    let (traj, events) = ode::solve_with_events(
        move |_t, s: &[f64; 10]| variational_rhs(s, a),
        0.0,
        variational_start(x0),
        t_end,
        cfg,
        |_t, s| s[2],
        Crossing::Falling,
    )?;
    let first = events.first();
    Ok(VarFlow { traj, half_period: first.map(|e| e.t), at_half_period: first.map(|e| VarFlowState::from_array(&e.y)) })
}

/// Integrates the variational system exactly up to the half period.
pub fn variational_to_half_period(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<(f64, VarFlowState)> {
    check_loop_start(x0, alpha)?;
    let a = alpha.get();
    let (_, ev) = ode::solve_until(
        move |_t, s: &[f64; 10]| variational_rhs(s, a),
        0.0,
        variational_start(x0),
        HALF_PERIOD_SEARCH,
        &cfg.without_dense(),
        |_t, s| s[2],
        Crossing::Falling,
    )?;
    Ok((ev.t, VarFlowState::from_array(&ev.y)))
}

/// `w² + e^{2z} + e^{-2 alpha z}/alpha - (1+alpha)/(alpha beta²)` with
/// `w = x - sqrt(alpha) y`, evaluated at the position of `g`.
pub fn cylinder_residual(g: &GeodesicState, beta: f64, alpha: Alpha) -> f64 {
    let a = alpha.get();
    let p = g.pos;
    let w = p.x - a.sqrt() * p.y;
    w * w + (2.0 * p.z).exp() + (-2.0 * a * p.z).exp() / a - (1.0 + a) / (a * beta * beta)
}

/// The base point from which the geodesic with initial direction `dir`
/// lies on the cylinder above, for the loop parameter `beta`.
///
/// The invariants `u1 e^{-z}` and `u2 e^{alpha z}` fix the height, and the
/// quantity `w + C u3` with `C = sqrt((1+alpha)/alpha)/beta` is constant
/// along the geodesic, which fixes `w`. Requires `u1 > 0`.
pub fn cylinder_anchor(dir: &SphereState, beta: f64, alpha: Alpha) -> Result<GroupPoint> {
    let a = alpha.require_positive()?.get();
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("beta", beta, "(0, 1]"));
    }
    if !(dir.u1 > 0.0) {
        return Err(domain("u1", dir.u1, "(0, 1]"));
    }
    let c = ((1.0 + a) / a).sqrt() / beta;
    let amp = beta * (a / (1.0 + a)).sqrt();
    Ok(GroupPoint::new(-c * dir.u3, 0.0, (dir.u1 / amp).ln()))
}

/// The direction `V_beta = (beta sqrt(alpha/(1+alpha)), beta/sqrt(1+alpha), sqrt(1-beta²))`
/// where the loop of parameter `beta` crosses the meridian through the
/// equilibrium.
pub fn v_beta(beta: f64, alpha: Alpha) -> Result<SphereState> {
    let a = alpha.require_positive()?.get();
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("beta", beta, "(0, 1]"));
    }
    Ok(SphereState { u1: beta * (a / (1.0 + a)).sqrt(), u2: beta / (1.0 + a).sqrt(), u3: (1.0 - beta * beta).sqrt() })
}
