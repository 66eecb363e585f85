//! Plane curves of symmetric flowline endpoints, the cut-locus boundary
//! curve in the plane `z = 0`, classification of geodesic segments, and the
//! numerical checks of the bounding-box and monotonicity properties.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::algebra::{Alpha, GroupPoint, SphereState, Vec3};
use crate::error::{domain, Error, Result};
use crate::flow::{self, SymFlowState, VarFlowState};
use crate::ode::IntegratorConfig;
use crate::period::{self, HalfPeriodClosedForm};
use crate::report::{location, CheckReport, GridAxis};
use crate::special::{ellip_k, ellip_k_deriv};
use crate::sweep;

/// Relative tolerance of the perfect class: `|T - P| <= tol * max(1, P)`.
pub const CLASS_TOL: f64 = 1e-9;

/// Directions closer than this to the equilibrium (`beta = 1`) or to the
/// separatrix circles have no loop period.
const LOOP_EDGE: f64 = 1e-12;

/// Grids on open `x0` intervals are pulled in by this much at each end.
pub const GRID_INSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SegmentClass {
    Small,
    Perfect,
    Large,
    Unclassifiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: SegmentClass,
    /// `T - P`, NaN when unclassifiable.
    pub slack: f64,
    pub period: Option<f64>,
}

impl Classification {
    fn unclassifiable() -> Self {
        Classification { class: SegmentClass::Unclassifiable, slack: f64::NAN, period: None }
    }
}

/// Compares the length of `v` with the period of the loop level set through
/// its direction. Directions on the poles, on the circles `u1 = 0` or
/// `u2 = 0`, or at an equilibrium are unclassifiable.
pub fn classify(v: Vec3, alpha: Alpha, tol: f64) -> Result<Classification> {
    alpha.require_positive()?;
    let len = crate::algebra::norm(&v);
    if !(len > 0.0 && len.is_finite()) {
        return Err(domain("|v|", len, "(0, inf)"));
    }
    let dir = SphereState::from_direction(v)?;
    if dir.u1.abs() < LOOP_EDGE || dir.u2.abs() < LOOP_EDGE {
        return Ok(Classification::unclassifiable());
    }
    let beta = period::beta_from_direction(&dir, alpha)?;
    if beta >= 1.0 - LOOP_EDGE {
        return Ok(Classification::unclassifiable());
    }
    let p = period::period(beta, alpha)?;
    let slack = len - p;
    let class = if slack.abs() <= tol * p.max(1.0) {
        SegmentClass::Perfect
    } else if slack < 0.0 {
        SegmentClass::Small
    } else {
        SegmentClass::Large
    };
    Ok(Classification { class, slack, period: Some(p) })
}

/// One point of the plane curve `t -> (a(t), b(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneCurveSample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub aprime: f64,
    pub bprime: f64,
}

impl PlaneCurveSample {
    fn new(t: f64, s: &SymFlowState, alpha: Alpha) -> Self {
        PlaneCurveSample { t, a: s.a, b: s.b, aprime: s.aprime(), bprime: s.bprime(alpha) }
    }
}

/// Samples of the endpoint curve at `t_k = rho k / n`, `k = 1..=n`; the last
/// sample is the half-period endpoint.
pub fn lambda_curve(x0: f64, alpha: Alpha, n_samples: usize, cfg: &IntegratorConfig) -> Result<Vec<PlaneCurveSample>> {
    if n_samples == 0 {
        return Ok(Vec::new());
    }
    let (rho, end, traj) = flow::symmetric_to_half_period(x0, alpha, cfg)?;
    let mut out = Vec::with_capacity(n_samples);
    for k in 1..n_samples {
        let t = rho * k as f64 / n_samples as f64;
        let s = traj.eval(t).ok_or(Error::Integrator { t_reached: t, reason: "dense output unavailable" })?;
        out.push(PlaneCurveSample::new(t, &SymFlowState::from_array(&s), alpha));
    }
    out.push(PlaneCurveSample::new(rho, &end, alpha));
    Ok(out)
}

/// Whether some sample lies strictly above the diagonal from the origin to
/// the final sample, i.e. outside the triangle `(0,0), (a_end,0), (a_end,b_end)`.
pub fn exits_bounding_triangle(curve: &[PlaneCurveSample]) -> bool {
    let Some(end) = curve.last() else { return false };
    curve[..curve.len() - 1].iter().any(|s| s.b * end.a > end.b * s.a)
}

/// A point of the candidate cut-locus boundary in the positive sector of
/// the plane `z = 0`, with its derivatives along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub x0: f64,
    pub rho: f64,
    pub a_end: f64,
    pub b_end: f64,
    pub x_end: f64,
    pub y_end: f64,
    pub dperiod_dx0: f64,
    pub da_dx0: f64,
    pub db_dx0: f64,
    /// `db/dx0` as `bbar + rho' b'`, integrating `bbar` directly.
    pub db_dx0_direct: f64,
    pub end: VarFlowState,
}

/// `dP/dx0` for the given loop: the elliptic closed form when
/// `alpha = 1/2`, the variational expression `-2 zbar / z'` otherwise.
fn period_derivative(x0: f64, alpha: Alpha, end: &VarFlowState) -> Result<f64> {
    if alpha.is_half() {
        period::dperiod_dx0(x0)
    } else {
        Ok(-2.0 * end.zbar / end.sym.zprime(alpha))
    }
}

/// Runs the variational flow to the half period and forms the endpoint and
/// its total derivatives in `x0`. With `chi = 2 zbar + alpha b ybar - a xbar`,
/// `da = chi / (x (1+alpha)) + x P'` and `db = -chi / (y (1+alpha)) + y P'`
/// at the half period, where `b z` vanishes.
pub fn boundary_point(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<BoundaryPoint> {
    let (rho, end) = flow::variational_to_half_period(x0, alpha, cfg)?;
    let dp = period_derivative(x0, alpha, &end)?;
    let al = alpha.get();
    let s = &end.sym;
    let chi = 2.0 * end.zbar + al * s.b * end.ybar - s.a * end.xbar;
    let da = chi / (s.x * (1.0 + al)) + s.x * dp;
    let db = -chi / (s.y * (1.0 + al)) + s.y * dp;
    let db_direct = end.bbar + 0.5 * dp * s.bprime(alpha);
    Ok(BoundaryPoint {
        x0,
        rho,
        a_end: s.a,
        b_end: s.b,
        x_end: s.x,
        y_end: s.y,
        dperiod_dx0: dp,
        da_dx0: da,
        db_dx0: db,
        db_dx0_direct: db_direct,
        end,
    })
}

/// [`boundary_point`] over a grid, in grid order.
pub fn boundary_curve(alpha: Alpha, x0_grid: &[f64], cfg: &IntegratorConfig) -> Result<Vec<BoundaryPoint>> {
    sweep::map(x0_grid, |&x0| boundary_point(x0, alpha, cfg)).into_iter().collect()
}

/// Central finite difference of the half-period endpoint in `x0`:
/// returns `(da/dx0, db/dx0)`.
pub fn endpoint_finite_difference(x0: f64, alpha: Alpha, h: f64, cfg: &IntegratorConfig) -> Result<(f64, f64)> {
    let cfg = cfg.without_dense();
    let (_, hi, _) = flow::symmetric_to_half_period(x0 + h, alpha, &cfg)?;
    let (_, lo, _) = flow::symmetric_to_half_period(x0 - h, alpha, &cfg)?;
    Ok(((hi.a - lo.a) / (2.0 * h), (hi.b - lo.b) / (2.0 * h)))
}

/// The open `x0` range of loops for `alpha`, pulled in by `inset`.
pub fn x0_grid(alpha: Alpha, n: usize, inset: f64) -> Vec<f64> {
    sweep::open_grid(alpha.equilibrium_x(), 1.0, n, inset)
}

/// Share of the `x0` range left out at each end by [`identity_grid`].
pub const IDENTITY_INSET_FRACTION: f64 = 0.02;

/// Grid for the per-loop identity checks, clear of the degenerate loop at
/// the equilibrium and of the separatrix, where the half period diverges.
pub fn identity_grid(alpha: Alpha, n: usize) -> Vec<f64> {
    x0_grid(alpha, n, IDENTITY_INSET_FRACTION * (1.0 - alpha.equilibrium_x()))
}

/// Smallest derivatives of the endpoint curve on `(0, rho)` at
/// `t_k = rho k / (n+1)`, `k = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSample {
    pub rho: f64,
    pub min_aprime: f64,
    pub min_bprime: f64,
    pub t_min_bprime: f64,
    /// Smallest of `a`, `b`, `a_end - a`, `b_end - b` over the samples.
    pub box_margin: f64,
}

pub fn bounding_box_sample(x0: f64, alpha: Alpha, n_t: usize, cfg: &IntegratorConfig) -> Result<BoxSample> {
    let (rho, end, traj) = flow::symmetric_to_half_period(x0, alpha, cfg)?;
    let mut out = BoxSample {
        rho,
        min_aprime: f64::INFINITY,
        min_bprime: f64::INFINITY,
        t_min_bprime: f64::NAN,
        box_margin: f64::INFINITY,
    };
    for k in 1..=n_t {
        let t = rho * k as f64 / (n_t as f64 + 1.0);
        let s = SymFlowState::from_array(
            &traj.eval(t).ok_or(Error::Integrator { t_reached: t, reason: "dense output unavailable" })?,
        );
        out.min_aprime = out.min_aprime.min(s.aprime());
        let bp = s.bprime(alpha);
        if bp < out.min_bprime {
            out.min_bprime = bp;
            out.t_min_bprime = t;
        }
        out.box_margin = out.box_margin.min(s.a).min(s.b).min(end.a - s.a).min(end.b - s.b);
    }
    Ok(out)
}

/// Every `(alpha, x0)` pair, alpha-major.
pub fn product_grid(alphas: &[Alpha], n_x0: usize, inset: f64) -> Vec<(Alpha, f64)> {
    alphas.iter().flat_map(|&a| x0_grid(a, n_x0, inset).into_iter().map(move |x| (a, x))).collect()
}

/// Asserts `a' > 0`, `b' > 0` and that the curve stays inside the open
/// box with corner `(a(rho), b(rho))` at `n_t` interior times per case.
pub fn check_bounding_box(cases: &[(Alpha, f64)], n_t: usize, cfg: &IntegratorConfig) -> CheckReport {
    let alphas: Vec<f64> = cases.iter().map(|c| c.0.get()).collect();
    let x0s: Vec<f64> = cases.iter().map(|c| c.1).collect();
    let mut report = CheckReport::new(
        "bounding_box",
        vec![GridAxis::over("alpha", &alphas), GridAxis::over("x0", &x0s), GridAxis::new("t/rho", 0.0, 1.0, n_t)],
    );
    let results = sweep::map(cases, |&(a, x0)| bounding_box_sample(x0, a, n_t, cfg));
    for (&(a, x0), r) in cases.iter().zip(results) {
        match r {
            Ok(s) => {
                let margin = s.min_aprime.min(s.min_bprime).min(s.box_margin);
                report.record(margin, location(&[("alpha", a.get()), ("x0", x0), ("t", s.t_min_bprime)]));
            }
            Err(e) => report.record_error(&e, location(&[("alpha", a.get()), ("x0", x0)])),
        }
    }
    report
}

/// `(t, b'(t))` at `t_k = t_end k / n`, `k = 0..=n`, along the symmetric
/// flowline (which may run past the half period).
pub fn bprime_trace(x0: f64, alpha: Alpha, t_end: f64, n: usize, cfg: &IntegratorConfig) -> Result<Vec<(f64, f64)>> {
    let flow = flow::flow_symmetric(x0, t_end, alpha, cfg)?;
    (0..=n)
        .map(|k| {
            let t = t_end * k as f64 / n.max(1) as f64;
            let s = flow.state_at(t).ok_or(Error::Integrator { t_reached: t, reason: "dense output unavailable" })?;
            Ok((t, s.bprime(alpha)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReciprocityCheck {
    pub x0: f64,
    pub x_end: f64,
    pub y_end: f64,
    pub mu: f64,
    /// `a x - alpha b y` at the half period from the symmetric flow.
    pub flow_residual: f64,
    /// The same combination for the exponential map of the perfect vector
    /// `P (x(rho), y(rho), 0)`, together with its `z` component.
    pub exp_residual: f64,
    pub endpoint: GroupPoint,
}

impl ReciprocityCheck {
    pub fn worst_residual(&self) -> f64 {
        self.flow_residual.abs().max(self.exp_residual.abs())
    }
}

/// The endpoint of the perfect equatorial geodesic is a multiple of
/// `(alpha y, x, 0)`; returns that multiple `mu = a / (alpha y)`.
pub fn check_reciprocity(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<ReciprocityCheck> {
    let (_, end, _) = flow::symmetric_to_half_period(x0, alpha, &cfg.without_dense())?;
    let al = alpha.get();
    let flow_residual = end.a * end.x - al * end.b * end.y;
    let p = period::period_from_x0(x0, alpha)?;
    let e = flow::exp_map([p * end.x, p * end.y, 0.0], alpha, cfg)?;
    let exp_residual = (e.x * end.x - al * e.y * end.y).abs().max(e.z.abs());
    Ok(ReciprocityCheck {
        x0,
        x_end: end.x,
        y_end: end.y,
        mu: end.a / (al * end.y),
        flow_residual,
        exp_residual,
        endpoint: e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartnerCheck {
    pub x0: f64,
    pub period: f64,
    /// Largest endpoint distance over the sampled loop points.
    pub distance: f64,
    pub worst_point: [f64; 3],
}

/// Loop times used for the partner vectors, as fractions of `rho`.
pub const PARTNER_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

/// For loop points `(x, y, z)` with `z != 0`, the perfect vectors
/// `P (x, y, z)` and `P (x, y, -z)` have the same exponential image.
pub fn check_partner_identification(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<PartnerCheck> {
    let (rho, _, traj) = flow::symmetric_to_half_period(x0, alpha, cfg)?;
    let p = period::period_from_x0(x0, alpha)?;
    let mut out = PartnerCheck { x0, period: p, distance: 0.0, worst_point: [f64::NAN; 3] };
    for f in PARTNER_FRACTIONS {
        let t = f * rho;
        let s = traj.eval(t).ok_or(Error::Integrator { t_reached: t, reason: "dense output unavailable" })?;
        let plus = flow::exp_map([p * s[0], p * s[1], p * s[2]], alpha, cfg)?;
        let minus = flow::exp_map([p * s[0], p * s[1], -p * s[2]], alpha, cfg)?;
        let d = plus.distance(minus);
        if !(d <= out.distance) {
            out.distance = d;
            out.worst_point = [s[0], s[1], s[2]];
        }
    }
    Ok(out)
}

/// `G(x0) = dP/dx0 - pi (1/(2 sqrt x0) + 2 x0 sqrt x0 / (1 - x0²))` for
/// `alpha = 1/2`.
pub fn g_function(x0: f64) -> Result<f64> {
    let dp = period::dperiod_dx0(x0)?;
    Ok(dp - PI * g_bound_term(x0))
}

fn g_bound_term(x0: f64) -> f64 {
    let r = x0.sqrt();
    0.5 / r + 2.0 * x0 * r / (1.0 - x0 * x0)
}

/// Default grid on `(1/sqrt 3, 1)` for the `alpha = 1/2` checks.
pub fn half_grid(n: usize) -> Vec<f64> {
    x0_grid(Alpha::HALF, n, GRID_INSET)
}

/// `G(x0) < 0` on the grid; the margin is `-G`.
pub fn check_g_negative(x0_grid: &[f64]) -> CheckReport {
    let mut report = CheckReport::new("g_function_negative", vec![GridAxis::over("x0", x0_grid)]);
    for (x0, g) in x0_grid.iter().zip(sweep::map(x0_grid, |&x| g_function(x))) {
        report.record_result(g.map(|g| -g), location(&[("x0", *x0)]));
    }
    report
}

/// The rational-radical bound whose being below 1 implies `G < 0`,
/// evaluated in double-double arithmetic. With `s = sqrt(4 - 3 x²)`:
///
/// `(27x⁶ - 36x⁴ - 3x² + 8 s^{1/2} + 4)² (2 - 3x² + s x)⁴ /
///  (64 s (2 + 12x² - 57x⁴ + 72x⁶ - 27x⁸ + s (6x - 17x³ + 18x⁵ - 9x⁷))²)`.
///
/// Numerator and denominator both vanish as `x0 -> 1`.
pub fn g_ratio(x0: f64) -> Result<f64> {
    if !(x0 > period::half_x0_min() && x0 < 1.0) {
        return Err(domain("x0", x0, "(1/sqrt(3), 1)"));
    }
    let x = TwoFloat::from(x0);
    let x2 = x * x;
    let x4 = x2 * x2;
    let x6 = x4 * x2;
    let x8 = x4 * x4;
    let s = (4.0 - 3.0 * x2).sqrt();
    let q = s.sqrt();
    let f1 = 27.0 * x6 - 36.0 * x4 - 3.0 * x2 + 8.0 * q + 4.0;
    let f2 = 2.0 - 3.0 * x2 + s * x;
    let poly = 2.0 + 12.0 * x2 - 57.0 * x4 + 72.0 * x6 - 27.0 * x8;
    let rad = x * (6.0 - 17.0 * x2 + 18.0 * x4 - 9.0 * x6);
    let d = poly + s * rad;
    let f2sq = f2 * f2;
    let num = f1 * f1 * f2sq * f2sq;
    let den = 64.0 * s * d * d;
    Ok(f64::from(num / den))
}

/// The same bound assembled from the elliptic coefficients:
/// `((C - B) / A)²` with `A` and `B` the coefficients of `K` and `E` in
/// `dP/dx0` and `C = 2 (1/(2 sqrt x0) + 2 x0 sqrt x0 / (1 - x0²))`.
pub fn g_ratio_unsimplified(x0: f64) -> Result<f64> {
    let c = HalfPeriodClosedForm::new(x0)?;
    let (s1, s2, d1, d2) = (c.sigma1, c.sigma2, c.dsigma1(), c.dsigma2());
    let a = d1 - s1 * d2 / (2.0 * s2);
    let b = s1 * d2 / (2.0 * s2 * (1.0 - s2));
    let q = (2.0 * g_bound_term(x0) - b) / a;
    Ok(q * q)
}

/// [`g_ratio`] below 1; the margin is `1 - value`.
pub fn check_g_ratio(x0_grid: &[f64]) -> CheckReport {
    let mut report = CheckReport::new("g_ratio_below_one", vec![GridAxis::over("x0", x0_grid)]);
    for (x0, v) in x0_grid.iter().zip(sweep::map(x0_grid, |&x| g_ratio(x))) {
        report.record_result(v.map(|v| 1.0 - v), location(&[("x0", *x0)]));
    }
    report
}

/// Half-period values of the variational flow for `alpha = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarsCheck {
    pub x0: f64,
    pub zbar: f64,
    pub zprime: f64,
    pub dperiod_dx0: f64,
    /// `zbar + (P'/2) z'`, zero when the half period is where `z` vanishes.
    pub residual: f64,
    pub xbar: f64,
    pub ybar: f64,
    /// Finite-difference-free values of `xbar`, `ybar` implied by the
    /// boundary relations `x(rho)² = 1 - y(rho)²` and `x0^alpha y0 = x^alpha y`.
    pub xbar_implied: f64,
    pub ybar_implied: f64,
    /// The closed values `-2 x0` and `1/(2 sqrt x0)` asserted for `xbar`, `ybar`.
    pub xbar_claimed: f64,
    pub ybar_claimed: f64,
}

pub fn check_bars_at_half_period(x0: f64, cfg: &IntegratorConfig) -> Result<BarsCheck> {
    let alpha = Alpha::HALF;
    let (_, end) = flow::variational_to_half_period(x0, alpha, cfg)?;
    let dp = period::dperiod_dx0(x0)?;
    let s = &end.sym;
    let zprime = s.zprime(alpha);
    let (xbar_implied, ybar_implied) = implied_end_bars(x0, s.x, s.y, alpha);
    Ok(BarsCheck {
        x0,
        zbar: end.zbar,
        zprime,
        dperiod_dx0: dp,
        residual: end.zbar + 0.5 * dp * zprime,
        xbar: end.xbar,
        ybar: end.ybar,
        xbar_implied,
        ybar_implied,
        xbar_claimed: -2.0 * x0,
        ybar_claimed: 0.5 / x0.sqrt(),
    })
}

/// Derivatives in `x0` of the half-period point `(x, y, 0)` from the two
/// relations it satisfies: `x² + y² = 1` and `x^alpha y = x0^alpha y0`.
/// Differentiating, `x xbar + y ybar = 0` and
/// `alpha xbar / x + ybar / y = h'/h` with `h'/h = alpha/x0 - x0/y0²`.
pub fn implied_end_bars(x0: f64, x: f64, y: f64, alpha: Alpha) -> (f64, f64) {
    let al = alpha.get();
    let y0sq = 1.0 - x0 * x0;
    let rhs = al / x0 - x0 / y0sq;
    // Substituting ybar = -x xbar / y.
    let xbar = rhs / (al / x - x / (y * y));
    (xbar, -x * xbar / y)
}

/// Extrapolated limit of `b_end` as `x0 -> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub alpha: f64,
    pub x0: [f64; 3],
    pub b_end: [f64; 3],
    pub estimate: f64,
    pub conjectured: f64,
    pub distance: f64,
    /// The Aitken step was ill-conditioned or not contracting; `estimate`
    /// then falls back to the last sample.
    pub unstable: bool,
}

pub const LIMIT_X0: [f64; 3] = [0.99, 0.999, 0.9999];

/// Aitken extrapolation of `b_end` over [`LIMIT_X0`], compared with `2/alpha`.
pub fn explore_l_alpha(alphas: &[Alpha], cfg: &IntegratorConfig) -> Vec<Result<LimitEstimate>> {
    sweep::map(alphas, |&alpha| {
        let mut b = [0.0; 3];
        for (bi, x0) in b.iter_mut().zip(LIMIT_X0) {
            *bi = flow::symmetric_to_half_period(x0, alpha, &cfg.without_dense())?.1.b;
        }
        let (estimate, unstable) = aitken(b);
        let conjectured = 2.0 / alpha.get();
        Ok(LimitEstimate {
            alpha: alpha.get(),
            x0: LIMIT_X0,
            b_end: b,
            estimate,
            conjectured,
            distance: (estimate - conjectured).abs(),
            unstable,
        })
    })
}

/// `b2 - (b2 - b1)² / (b2 - 2 b1 + b0)` with an instability flag.
fn aitken(b: [f64; 3]) -> (f64, bool) {
    let d1 = b[1] - b[0];
    let d2 = b[2] - b[1];
    let den = d2 - d1;
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if den.abs() <= 1e-12 * scale || d1 == 0.0 {
        return (b[2], true);
    }
    let ratio = d2 / d1;
    let est = b[2] - d2 * d2 / den;
    if !(ratio.abs() < 1.0) || !est.is_finite() || (est - b[2]).abs() > (b[2] - b[0]).abs() {
        return (b[2], true);
    }
    (est, false)
}

/// `da/dx0 > 0` and `db/dx0 <= db_tol` along the boundary curve. Only the
/// case `alpha = 1/2` is established; other values run as exploratory.
pub fn check_monotonicity(alpha: Alpha, x0_grid: &[f64], db_tol: f64, cfg: &IntegratorConfig) -> CheckReport {
    let name = "boundary_monotone";
    let mut report = CheckReport::new(
        name,
        vec![GridAxis::new("alpha", alpha.get(), alpha.get(), 1), GridAxis::over("x0", x0_grid)],
    );
    if !alpha.is_half() {
        report = report.exploratory();
    }
    for (x0, r) in x0_grid.iter().zip(sweep::map(x0_grid, |&x| boundary_point(x, alpha, cfg))) {
        let loc = location(&[("x0", *x0)]);
        match r {
            Ok(p) => report.record(p.da_dx0.min(db_tol - p.db_dx0), loc),
            Err(e) => report.record_error(&e, loc),
        }
    }
    report
}

/// `0 < b_end < a_end` along the boundary curve. This fails close to the
/// equilibrium when `alpha < 1`, since `b < a` there iff `alpha y > x`
/// at the half period; it runs as exploratory.
pub fn check_boundary_ordering(alpha: Alpha, x0_grid: &[f64], cfg: &IntegratorConfig) -> CheckReport {
    let mut report = CheckReport::new(
        "boundary_ordering",
        vec![GridAxis::new("alpha", alpha.get(), alpha.get(), 1), GridAxis::over("x0", x0_grid)],
    )
    .exploratory();
    let ends = sweep::map(x0_grid, |&x| flow::symmetric_to_half_period(x, alpha, &cfg.without_dense()));
    for (x0, r) in x0_grid.iter().zip(ends) {
        let loc = location(&[("x0", *x0)]);
        report.record_result(r.map(|(_, e, _)| (e.a - e.b).min(e.b)), loc);
    }
    report
}

/// The holonomy invariant increases with the period: finite-difference
/// slopes `dH/dP` between consecutive grid loops.
pub fn check_holonomy_monotone(alpha: Alpha, x0_grid: &[f64], cfg: &IntegratorConfig) -> CheckReport {
    let mut report = CheckReport::new(
        "holonomy_increasing",
        vec![GridAxis::new("alpha", alpha.get(), alpha.get(), 1), GridAxis::over("x0", x0_grid)],
    );
    let specs = sweep::map(x0_grid, |&x| period::LoopSpec::from_x0(x, alpha, cfg));
    for (i, w) in specs.windows(2).enumerate() {
        let loc = location(&[("x0", x0_grid[i]), ("x0_next", x0_grid[i + 1])]);
        match (&w[0], &w[1]) {
            (Ok(l), Ok(r)) => report.record((r.holonomy - l.holonomy) / (r.period - l.period), loc),
            (Err(e), _) | (_, Err(e)) => report.record_error(e, loc),
        }
    }
    report
}

/// Smallest singular value of the central-difference Jacobian of the
/// exponential map at `v`.
pub fn exp_map_min_singular_value(v: Vec3, alpha: Alpha, h: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let mut vp = v;
        let mut vm = v;
        vp[j] += h;
        vm[j] -= h;
        let p = flow::exp_map(vp, alpha, cfg)?.to_array();
        let m = flow::exp_map(vm, alpha, cfg)?.to_array();
        for i in 0..3 {
            jac[(i, j)] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    Ok(jac.singular_values().min())
}

/// Minimal Jacobian singular value at perfect vectors `P (x, y, z)` through
/// [`PARTNER_FRACTIONS`] of the loop from `x0`.
pub fn perfect_jacobian_min_singular(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<f64> {
    let (rho, _, traj) = flow::symmetric_to_half_period(x0, alpha, cfg)?;
    let p = period::period_from_x0(x0, alpha)?;
    let mut best = f64::INFINITY;
    for f in PARTNER_FRACTIONS {
        let s =
            traj.eval(f * rho).ok_or(Error::Integrator { t_reached: f * rho, reason: "dense output unavailable" })?;
        best = best.min(exp_map_min_singular_value([p * s[0], p * s[1], p * s[2]], alpha, 1e-5, cfg)?);
    }
    Ok(best)
}

/// Tolerances of the per-loop identity checks.
pub const PARTNER_TOL: f64 = 1e-6;
pub const RECIPROCITY_TOL: f64 = 1e-7;
pub const HALF_PERIOD_BAR_TOL: f64 = 1e-6;

fn single_alpha_axes(alpha: Alpha, x0_grid: &[f64]) -> Vec<GridAxis> {
    vec![GridAxis::new("alpha", alpha.get(), alpha.get(), 1), GridAxis::over("x0", x0_grid)]
}

/// [`check_partner_identification`] over a grid; margin `tol - distance`.
pub fn partner_report(alpha: Alpha, x0_grid: &[f64], cfg: &IntegratorConfig) -> CheckReport {
    let mut report = CheckReport::new("partner_identification", single_alpha_axes(alpha, x0_grid));
    let res = sweep::map(x0_grid, |&x| check_partner_identification(x, alpha, cfg));
    for (x0, r) in x0_grid.iter().zip(res) {
        report.record_result(r.map(|c| PARTNER_TOL - c.distance), location(&[("x0", *x0)]));
    }
    report
}

/// [`check_reciprocity`] over a grid; margin `tol - residual`, and `mu`
/// must not vanish.
pub fn reciprocity_report(alpha: Alpha, x0_grid: &[f64], cfg: &IntegratorConfig) -> CheckReport {
    let mut report = CheckReport::new("reciprocity", single_alpha_axes(alpha, x0_grid));
    let res = sweep::map(x0_grid, |&x| check_reciprocity(x, alpha, cfg));
    for (x0, r) in x0_grid.iter().zip(res) {
        let margin = r.map(|c| if c.mu != 0.0 { RECIPROCITY_TOL - c.worst_residual() } else { f64::NEG_INFINITY });
        report.record_result(margin, location(&[("x0", *x0)]));
    }
    report
}

/// `zbar + (P'/2) z' = 0` with `zbar > 0` at the half period, `alpha = 1/2`.
pub fn half_period_zbar_report(x0_grid: &[f64], cfg: &IntegratorConfig) -> CheckReport {
    let mut report = CheckReport::new("half_period_zbar", single_alpha_axes(Alpha::HALF, x0_grid));
    let res = sweep::map(x0_grid, |&x| check_bars_at_half_period(x, cfg));
    for (x0, r) in x0_grid.iter().zip(res) {
        let margin = r.map(|c| (HALF_PERIOD_BAR_TOL - c.residual.abs()).min(c.zbar).min(-c.zprime));
        report.record_result(margin, location(&[("x0", *x0)]));
    }
    report
}

/// The closed values `xbar = -2 x0`, `ybar = 1/(2 sqrt x0)` at the half
/// period. They follow from `x0^alpha = y(rho)`, which is incompatible with
/// `x² + y² = 1` for `alpha != 1`, so this runs as exploratory.
pub fn half_period_end_bars_report(x0_grid: &[f64], cfg: &IntegratorConfig) -> CheckReport {
    let mut report =
        CheckReport::new("half_period_end_bars_closed_values", single_alpha_axes(Alpha::HALF, x0_grid)).exploratory();
    let res = sweep::map(x0_grid, |&x| check_bars_at_half_period(x, cfg));
    for (x0, r) in x0_grid.iter().zip(res) {
        let margin =
            r.map(|c| HALF_PERIOD_BAR_TOL - (c.xbar - c.xbar_claimed).abs().max((c.ybar - c.ybar_claimed).abs()));
        report.record_result(margin, location(&[("x0", *x0)]));
    }
    report
}

/// `y(rho) = x0^alpha` at the half period (exact for `alpha = 1`);
/// exploratory for other values.
pub fn boundary_symmetry_report(alpha: Alpha, x0_grid: &[f64], tol: f64, cfg: &IntegratorConfig) -> CheckReport {
    let mut report = CheckReport::new("boundary_symmetry", single_alpha_axes(alpha, x0_grid));
    if alpha.get() != 1.0 {
        report = report.exploratory();
    }
    let res = sweep::map(x0_grid, |&x| flow::symmetric_to_half_period(x, alpha, &cfg.without_dense()));
    for (x0, r) in x0_grid.iter().zip(res) {
        report.record_result(r.map(|(_, e, _)| tol - (x0.powf(alpha.get()) - e.y).abs()), location(&[("x0", *x0)]));
    }
    report
}

/// `sigma1' K(sigma2) + sigma1 sigma2' dK/dm(sigma2)`: an independent
/// evaluation of `dP/dx0` from the chain rule on `P = sigma1 K(sigma2)`.
pub fn dperiod_dx0_chain(x0: f64) -> Result<f64> {
    let c = HalfPeriodClosedForm::new(x0)?;
    Ok(c.dsigma1() * ellip_k(c.sigma2)? + c.sigma1 * c.dsigma2() * ellip_k_deriv(c.sigma2)?)
}
