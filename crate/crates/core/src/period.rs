//! Periods of the loop level sets.
//!
//! A loop is identified either by `beta ∈ (0, 1)`, through the point
//! `V_beta` where it crosses the meridian of the equilibrium, or by
//! `x0 ∈ (sqrt(alpha/(1+alpha)), 1)`, where it crosses the equator `z = 0`
//! with `u1 = x0`. Both labels are related by equality of the level value
//! `|u1|^alpha u2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::{level_raw, Alpha, SphereState};
use crate::error::{domain, Error, Result};
use crate::flow::{self, check_loop_start};
use crate::ode::IntegratorConfig;
use crate::quad;
use crate::special::{ellip_e, ellip_k, ellip_k_deriv};

/// Flow times from `V_beta` to the equator, forward (`t0`) and backward (`t1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointTimes {
    pub t0: f64,
    pub t1: f64,
}

fn check_beta_open(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain("beta", beta, "(0, 1)"));
    }
    Ok(())
}

/// `(e^d - 1 - d) / d`, accurate for small `|d|`; zero at `d = 0`.
fn expm1_excess_ratio(d: f64) -> f64 {
    if d.abs() < 0.1 {
        // Taylor series with terms d^k / (k+1)!, k = 1..=9.
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=9 {
            term *= d / (k + 1) as f64;
            sum += term;
        }
        sum
    } else {
        (d.exp_m1() - d) / d
    }
}

/// `e^x - 1 - x` without cancellation.
fn expm1_excess(x: f64) -> f64 {
    x * expm1_excess_ratio(x)
}

/// `(E(c s) - E(c (s - u))) / u` with `E(x) = e^x - 1 - x`, continuous at
/// `u = 0`.
fn excess_slope(c: f64, s: f64, u: f64) -> f64 {
    let d = c * u;
    c * ((c * (s - u)).exp_m1() * (1.0 + expm1_excess_ratio(d)) + expm1_excess_ratio(d))
}

/// `alpha e^{2t} + e^{-2 alpha t} - (alpha+1)/beta²`, arranged as a sum of
/// nonnegative terms so the residual keeps its accuracy when `beta` is
/// close to one.
pub fn upper_time_residual(t: f64, beta: f64, a: f64) -> f64 {
    a * expm1_excess(2.0 * t) + expm1_excess(-2.0 * a * t) - (a + 1.0) * (1.0 - beta * beta) / (beta * beta)
}

/// `alpha e^{-2t} + e^{2 alpha t} - (alpha+1)/beta²`.
pub fn lower_time_residual(t: f64, beta: f64, a: f64) -> f64 {
    a * expm1_excess(-2.0 * t) + expm1_excess(2.0 * a * t) - (a + 1.0) * (1.0 - beta * beta) / (beta * beta)
}

/// Safeguarded Newton iteration for an increasing function with
/// `f(lo) < 0 < f(hi)`.
fn newton_bisect(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if !(flo <= 0.0 && fhi >= 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if newton > lo && newton < hi && dfx > 0.0 { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-16 * x.abs().max(1e-300) || hi - lo <= 1e-16 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Positive roots of the endpoint equations for `beta ∈ (0, 1)`.
pub fn endpoint_times(beta: f64, alpha: Alpha) -> Result<EndpointTimes> {
    check_beta_open(beta)?;
    let a = alpha.require_positive()?.get();
    let target = (a + 1.0) / (beta * beta);
    // At these times one exponential alone reaches the target; a margin keeps
    // the bracket valid after rounding.
    let t0_hi = 0.5 * (target / a).ln() + 1.0;
    let t1_hi = target.ln() / (2.0 * a) + 1.0;
    let t0 = newton_bisect(
        |t| (upper_time_residual(t, beta, a), 2.0 * a * ((2.0 * t).exp() - (-2.0 * a * t).exp())),
        0.0,
        t0_hi,
    )?;
    let t1 = newton_bisect(
        |t| (lower_time_residual(t, beta, a), 2.0 * a * ((2.0 * a * t).exp() - (-2.0 * t).exp())),
        0.0,
        t1_hi,
    )?;
    Ok(EndpointTimes { t0, t1 })
}

/// Endpoint times for `alpha = 1/2` from the trigonometric solution of
/// `u³ - (3/beta²) u + 2 = 0`, whose positive roots are `e^{t0}` and
/// `e^{-t1}`.
pub fn endpoint_times_cardano(beta: f64) -> Result<EndpointTimes> {
    check_beta_open(beta)?;
    let theta = (-beta.powi(3)).acos() / 3.0;
    let largest = 2.0 * theta.cos() / beta;
    let middle = 2.0 * (theta - 2.0 * PI / 3.0).cos() / beta;
    Ok(EndpointTimes { t0: largest.ln(), t1: -middle.ln() })
}

/// Closed slice `w² + e^{2z} + e^{-2 alpha z}/alpha = (1+alpha)/(alpha beta²)`
/// of the cylinder of the loop `beta`, as `(w, z)` pairs: `n + 1` points up
/// the branch `w >= 0`, then back down the branch `w <= 0`. The heights span
/// `[-t1, t0]` of [`endpoint_times`], spaced more densely near the ends.
pub fn cylinder_slice(beta: f64, alpha: Alpha, n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(domain("n", 0.0, "[1, inf)"));
    }
    let a = alpha.require_positive()?.get();
    let EndpointTimes { t0, t1 } = endpoint_times(beta, alpha)?;
    let heights: Vec<f64> = (0..=n).map(|k| -t1 + (t0 + t1) * 0.5 * (1.0 - (PI * k as f64 / n as f64).cos())).collect();
    let width = |z: f64| (-upper_time_residual(z, beta, a) / a).max(0.0).sqrt();
    let mut out: Vec<(f64, f64)> = heights.iter().map(|&z| (width(z), z)).collect();
    out.extend(heights.iter().rev().skip(1).map(|&z| (-width(z), z)));
    Ok(out)
}

/// Period of the loop through `V_beta` by quadrature of
/// `∫_{-t1}^{t0} 2 dt / sqrt(1 - beta² (alpha e^{2t} + e^{-2 alpha t}) / (alpha+1))`.
///
/// The interval is split at its midpoint and each half is mapped with
/// `t = t0 - s²` or `t = -t1 + s²`, which turns the inverse-square-root
/// endpoint singularities into smooth integrands.
pub fn period_quadrature(beta: f64, alpha: Alpha) -> Result<f64> {
    let EndpointTimes { t0, t1 } = endpoint_times(beta, alpha)?;
    let a = alpha.get();
    let scale = 4.0 * (a + 1.0).sqrt() / beta;
    let mid = 0.5 * (t0 - t1);

    // (F(t0) - F(t0 - u)) / u for F(t) = alpha e^{2t} + e^{-2 alpha t}, and
    // the mirrored quotient at the lower end.
    let g_up = move |u: f64| a * excess_slope(2.0, t0, u) + excess_slope(-2.0 * a, t0, u);
    let g_lo = move |u: f64| a * excess_slope(-2.0, t1, u) + excess_slope(2.0 * a, t1, u);
    let upper_len = (t0 - mid).sqrt();
    let lower_len = (mid + t1).sqrt();
    let part = |g: &dyn Fn(f64) -> f64, len: f64| -> Result<f64> {
        let integrand = |s: f64| scale / g(s * s).sqrt();
        match quad::integrate(integrand, 0.0, len, 1e-13, 1e-14) {
            Ok(r) => Ok(r.value),
            Err(_) => quad::tanh_sinh(integrand, 0.0, len, 1e-13).map(|r| r.value),
        }
    };
    Ok(part(&g_up, upper_len)? + part(&g_lo, lower_len)?)
}

/// Closed form for `alpha = 1`: `4 / sqrt(1+beta²) K((1-beta²)/(1+beta²))`.
pub fn period_sol(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("beta", beta, "(0, 1]"));
    }
    let b2 = beta * beta;
    Ok(4.0 / (1.0 + b2).sqrt() * ellip_k((1.0 - b2) / (1.0 + b2))?)
}

/// Closed form for `alpha = 1/2` in terms of the endpoint times:
/// `4 sqrt(3) / (beta sqrt(D)) K(2 (e^{t1} - e^{-t0}) / D)` with
/// `D = e^{t0 - t1} + 2 e^{t1}`.
pub fn period_half_by_beta(beta: f64) -> Result<f64> {
    let EndpointTimes { t0, t1 } = endpoint_times(beta, Alpha::HALF)?;
    let d = (t0 - t1).exp() + 2.0 * t1.exp();
    let m = 2.0 * (t1.exp() - (-t0).exp()) / d;
    Ok(4.0 * 3f64.sqrt() / (beta * d.sqrt()) * ellip_k(m)?)
}

/// The constants of the `dn` closed form of the half-period flow for
/// `alpha = 1/2`, and the transformed parameters used for its period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPeriodClosedForm {
    pub x0: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub nu4: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Lower end `1/sqrt(3)` of the `x0` range for `alpha = 1/2`.
pub fn half_x0_min() -> f64 {
    Alpha::HALF.equilibrium_x()
}

fn check_half_x0(x0: f64) -> Result<()> {
    if !(x0 > half_x0_min() && x0 < 1.0) {
        return Err(domain("x0", x0, "(1/sqrt(3), 1)"));
    }
    Ok(())
}

impl HalfPeriodClosedForm {
    pub fn new(x0: f64) -> Result<Self> {
        check_half_x0(x0)?;
        let x2 = x0 * x0;
        let r = (4.0 * x2 - 3.0 * x2 * x2).sqrt();
        let nu1 = 0.5 * (x2 - r);
        let nu2 = 0.5 * (2.0 - 3.0 * x2 + r);
        let nu3 = (2.0 - 3.0 * x2 + r).sqrt() / (2.0 * 2f64.sqrt());
        let nu4 = (2.0 - 3.0 * x2 - r) / (2.0 - 3.0 * x2 + r);
        let sigma1 = 2.0 / (nu3 * (1.0 - nu4).sqrt());
        let sigma2 = nu4 / (nu4 - 1.0);
        Ok(HalfPeriodClosedForm { x0, nu1, nu2, nu3, nu4, sigma1, sigma2 })
    }

    /// `y(t)² = nu1 + nu2 dn(t nu3, nu4)²` along the backward flow.
    pub fn y_squared(&self, t: f64) -> Result<f64> {
        let dn = crate::special::jacobi_dn(t * self.nu3, self.nu4)?;
        Ok(self.nu1 + self.nu2 * dn * dn)
    }

    /// `dsigma1/dx0 = -4 x0 (2 - 3 x0²) / r^{5/2}` with `r = x0 sqrt(4 - 3 x0²)`.
    pub fn dsigma1(&self) -> f64 {
        let x = self.x0;
        let r = x * (4.0 - 3.0 * x * x).sqrt();
        -4.0 * x * (2.0 - 3.0 * x * x) / r.powf(2.5)
    }

    /// `dsigma2/dx0 = 4 x0 / r³`.
    pub fn dsigma2(&self) -> f64 {
        let x = self.x0;
        let r = x * (4.0 - 3.0 * x * x).sqrt();
        4.0 * x / (r * r * r)
    }
}

/// Period for `alpha = 1/2` as `2 K(nu4) / nu3`, with the negative
/// parameter `nu4` moved into `[0, 1)` first:
/// `2 K(nu4) / nu3 = sigma1 K(sigma2)`.
pub fn period_half(x0: f64) -> Result<f64> {
    let c = HalfPeriodClosedForm::new(x0)?;
    Ok(c.sigma1 * ellip_k(c.sigma2)?)
}

/// `dP/dx0` for `alpha = 1/2`:
/// `K(s2) (s1' - s1 s2' / (2 s2)) + E(s2) s1 s2' / (2 s2 (1 - s2))`.
/// For small `s2` the two singular terms are combined into
/// `s1 s2' dK/dm(s2)`, which is regular at `s2 = 0`.
pub fn dperiod_dx0(x0: f64) -> Result<f64> {
    let c = HalfPeriodClosedForm::new(x0)?;
    let (s1, s2) = (c.sigma1, c.sigma2);
    let (d1, d2) = (c.dsigma1(), c.dsigma2());
    let k = ellip_k(s2)?;
    if s2 < 0.05 {
        return Ok(k * d1 + s1 * d2 * ellip_k_deriv(s2)?);
    }
    let e = ellip_e(s2)?;
    Ok(k * (d1 - s1 * d2 / (2.0 * s2)) + e * s1 * d2 / (2.0 * s2 * (1.0 - s2)))
}

/// `dP/dx0` for any `alpha` from the variational flow: at the half period
/// `zbar + rho' z' = 0` with `rho' = P'/2`.
pub fn dperiod_dx0_variational(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<f64> {
    let (_, s) = flow::variational_to_half_period(x0, alpha, cfg)?;
    Ok(-2.0 * s.zbar / s.sym.zprime(alpha))
}

/// Loop parameter `beta` of the level set through `(x0, sqrt(1-x0²), 0)`.
///
/// `H(V_beta) = beta^{1+alpha} alpha^{alpha/2} (1+alpha)^{-(1+alpha)/2}`, so
/// matching levels is explicit; for `alpha = 1/2` this is the cubic
/// `beta³ = (3 sqrt(3)/2)(x0 - x0³)`.
pub fn beta_from_x0(x0: f64, alpha: Alpha) -> Result<f64> {
    let a = alpha.require_positive()?.get();
    let lo = alpha.equilibrium_x();
    if !(x0 >= lo && x0 < 1.0) {
        return Err(domain("x0", x0, "[sqrt(alpha/(1+alpha)), 1)"));
    }
    if x0 == lo {
        return Ok(1.0);
    }
    if alpha.is_half() {
        return Ok((1.5 * 3f64.sqrt() * (x0 - x0 * x0 * x0)).cbrt().min(1.0));
    }
    let h = level_raw(x0, (1.0 - x0 * x0).sqrt(), a);
    Ok(beta_from_level(h, a).min(1.0))
}

fn beta_from_level(h: f64, a: f64) -> f64 {
    let unit = a.powf(0.5 * a) * (1.0 + a).powf(-0.5 * (1.0 + a));
    (h / unit).powf(1.0 / (1.0 + a))
}

/// Level `beta` of the loop through a direction in the open positive
/// sector (any sector, by the reflection symmetries).
pub fn beta_from_direction(dir: &SphereState, alpha: Alpha) -> Result<f64> {
    let a = alpha.require_positive()?.get();
    let h = level_raw(dir.u1.abs(), dir.u2.abs(), a);
    if !(h > 0.0) {
        return Err(domain("|u1|^alpha |u2|", h, "(0, max]"));
    }
    Ok(beta_from_level(h, a).min(1.0))
}

/// Inverse of [`beta_from_x0`] on `(sqrt(alpha/(1+alpha)), 1)`.
pub fn x0_from_beta(beta: f64, alpha: Alpha) -> Result<f64> {
    let a = alpha.require_positive()?.get();
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("beta", beta, "(0, 1]"));
    }
    let lo = alpha.equilibrium_x();
    if beta == 1.0 {
        return Ok(lo);
    }
    let target = beta.powf(1.0 + a);
    // beta(x0)^{1+alpha} decreases from 1 at the equilibrium to 0 at x0 = 1.
    let g = |x: f64| {
        let h = level_raw(x, (1.0 - x * x).sqrt(), a);
        let unit = a.powf(0.5 * a) * (1.0 + a).powf(-0.5 * (1.0 + a));
        h / unit - target
    };
    let (mut l, mut r) = (lo, 1.0);
    for _ in 0..200 {
        let m = 0.5 * (l + r);
        if m == l || m == r {
            break;
        }
        if g(m) > 0.0 {
            l = m;
        } else {
            r = m;
        }
    }
    Ok(0.5 * (l + r))
}

/// Period of the loop `beta`, `alpha ∈ (0, 1]`, by quadrature.
pub fn period(beta: f64, alpha: Alpha) -> Result<f64> {
    period_quadrature(beta, alpha)
}

/// Period of the loop with equatorial crossing `x0`.
pub fn period_from_x0(x0: f64, alpha: Alpha) -> Result<f64> {
    check_loop_start(x0, alpha)?;
    period_quadrature(beta_from_x0(x0, alpha)?, alpha)
}

/// A loop level set with its two labels, period and holonomy invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopSpec {
    pub alpha: Alpha,
    pub beta: f64,
    pub x0: f64,
    pub period: f64,
    pub holonomy: f64,
}

impl LoopSpec {
    pub fn from_x0(x0: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<Self> {
        check_loop_start(x0, alpha)?;
        let beta = beta_from_x0(x0, alpha)?;
        let period = period_quadrature(beta, alpha)?;
        let (_, end, _) = flow::symmetric_to_half_period(x0, alpha, &cfg.without_dense())?;
        Ok(LoopSpec { alpha, beta, x0, period, holonomy: holonomy_of_endpoint(end.a, end.b, alpha) })
    }

    pub fn from_beta(beta: f64, alpha: Alpha, cfg: &IntegratorConfig) -> Result<Self> {
        check_beta_open(beta)?;
        Self::from_x0(x0_from_beta(beta, alpha)?, alpha, cfg)
    }
}

/// `sqrt(|a^alpha b|)` for an endpoint `(a, b, 0)`.
pub fn holonomy_of_endpoint(a: f64, b: f64, alpha: Alpha) -> f64 {
    (a.abs().powf(alpha.get()) * b.abs()).sqrt()
}

pub fn holonomy(spec: &LoopSpec) -> f64 {
    spec.holonomy
}

/// Holonomy computed from the perfect geodesic with initial direction `dir`
/// (any point of the loop), via the exponential map.
pub fn holonomy_from_direction(dir: &SphereState, alpha: Alpha, cfg: &IntegratorConfig) -> Result<f64> {
    let beta = beta_from_direction(dir, alpha)?;
    let p = period_quadrature(beta, alpha)?;
    let e = flow::exp_map([p * dir.u1, p * dir.u2, p * dir.u3], alpha, cfg)?;
    Ok(holonomy_of_endpoint(e.x, e.y, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::v_beta;

    fn alpha(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn excess_helpers_match_direct_formulas() {
        for &x in &[-3.0f64, -0.5, -0.099, -1e-3, 1e-3, 0.05, 0.099, 0.1, 0.7, 2.0] {
            let direct = x.exp_m1() - x;
            assert!((expm1_excess(x) - direct).abs() <= 2e-15 * x.abs().max(direct.abs()), "x={x}");
        }
        assert_eq!(expm1_excess_ratio(0.0), 0.0);
        assert!((expm1_excess(1e-8) / (5e-17 + 1e-24 / 6.0) - 1.0).abs() < 1e-15);
        let (c, s0, u): (f64, f64, f64) = (1.5, 0.3, 0.2);
        let e = |x: f64| x.exp_m1() - x;
        let direct = (e(c * s0) - e(c * (s0 - u))) / u;
        assert!((excess_slope(c, s0, u) - direct).abs() < 1e-14);
        assert!((excess_slope(c, s0, 0.0) - c * (c * s0).exp_m1()).abs() < 1e-15);
    }

    #[test]
    fn small_loops_approach_harmonic_period() {
        for &a in &[0.25, 0.5, 0.75, 1.0] {
            let al = alpha(a);
            for &d in &[1e-7, 1e-6, 1e-5] {
                let beta = beta_from_x0(al.equilibrium_x() + d, al).unwrap();
                let p = period_quadrature(beta, al).unwrap();
                let harmonic = PI * (2.0 / a).sqrt();
                assert!((p - harmonic).abs() < 1e-6 * harmonic, "a={a} d={d} p={p}");
            }
        }
    }

    #[test]
    fn cylinder_slice_lies_on_cylinder() {
        for &(beta, a) in &[(0.3, 1.0), (0.8, 0.5), (0.95, 0.2)] {
            let al = alpha(a);
            let pts = cylinder_slice(beta, al, 64).unwrap();
            assert_eq!(pts.len(), 129);
            assert_eq!(pts[0].1, pts[128].1);
            for &(w, z) in &pts {
                let g = flow::GeodesicState { pos: crate::GroupPoint::new(w, 0.0, z), dir: SphereState::NORTH };
                let r = flow::cylinder_residual(&g, beta, al);
                assert!(r.abs() < 1e-9 * (1.0 + a) / (a * beta * beta), "beta={beta} a={a} z={z} r={r}");
            }
            assert!(pts[..=64].iter().all(|p| p.0 >= 0.0) && pts[65..].iter().all(|p| p.0 <= 0.0));
            assert!(pts[0].0 < 1e-6 && pts[64].0 < 1e-6);
        }
    }

    /// Independent period oracle: integrate the structure field from `V_beta`
    /// until it returns to its starting meridian.
    fn period_by_flow(beta: f64, al: Alpha) -> f64 {
        let s0 = v_beta(beta, al).unwrap();
        let a = al.get();
        let ratio = s0.u1 / s0.u2;
        // The meridian plane is crossed once at the bottom of the loop and
        // again when the flow returns to V_beta.
        let (_, evs) = crate::ode::solve_with_events(
            move |_t, u: &[f64; 3]| crate::algebra::structure_field_raw(u, a),
            0.0,
            s0.to_array(),
            60.0,
            &IntegratorConfig::default(),
            move |_t, u| u[0] - ratio * u[1],
            crate::ode::Crossing::Any,
        )
        .unwrap();
        evs[1].t
    }

    #[test]
    fn endpoint_roots_satisfy_equations() {
        for a in [0.1, 0.5, 1.0] {
            for beta in [0.05, 0.3, 0.7, 0.99, 0.999999] {
                let t = endpoint_times(beta, alpha(a)).unwrap();
                let target = (a + 1.0) / (beta * beta);
                let r0 = a * (2.0 * t.t0).exp() + (-2.0 * a * t.t0).exp() - target;
                let r1 = a * (-2.0 * t.t1).exp() + (2.0 * a * t.t1).exp() - target;
                assert!(r0.abs() < 1e-12 * target && r1.abs() < 1e-12 * target, "{a} {beta}");
                assert!(t.t0 > 0.0 && t.t1 > 0.0);
            }
        }
        let t = endpoint_times(1.0 - 1e-12, Alpha::HALF).unwrap();
        assert!(t.t0 < 1e-5 && t.t1 < 1e-5);
        assert!(endpoint_times(1.0, Alpha::HALF).is_err());
        assert!(endpoint_times(0.5, alpha(0.0)).is_err());
    }

    #[test]
    fn cardano_oracle() {
        for beta in [0.1, 0.5, 0.7, 0.95, 0.999] {
            let a = endpoint_times(beta, Alpha::HALF).unwrap();
            let b = endpoint_times_cardano(beta).unwrap();
            assert!((a.t0 - b.t0).abs() < 1e-11 && (a.t1 - b.t1).abs() < 1e-11, "{beta}");
        }
    }

    #[test]
    fn table_values() {
        for (a, expected, tol) in [(1.0, 4.44622, 5e-4), (0.5, 6.28842, 5e-4), (0.1, 14.0792, 5e-3)] {
            let p = period_quadrature(0.999, alpha(a)).unwrap();
            assert!((p - expected).abs() < tol, "{a}: {p}");
        }
    }

    #[test]
    fn quadrature_against_flow_oracle() {
        for (a, beta) in [(0.5, 0.7), (1.0, 0.4), (0.2, 0.9), (0.8, 0.15)] {
            let q = period_quadrature(beta, alpha(a)).unwrap();
            let f = period_by_flow(beta, alpha(a));
            assert!((q - f).abs() < 1e-8, "{a} {beta}: {q} vs {f}");
        }
    }

    #[test]
    fn sol_closed_form() {
        assert!((period_sol(1.0).unwrap() - PI * 2f64.sqrt()).abs() < 1e-15);
        for beta in [0.05, 0.5, 0.9, 0.999] {
            let q = period_quadrature(beta, Alpha::SOL).unwrap();
            assert!((q - period_sol(beta).unwrap()).abs() < 1e-9, "{beta}");
        }
    }

    #[test]
    fn half_closed_forms_agree() {
        for x0 in [0.6, 0.7, 0.8, 0.9, 0.99] {
            let beta = beta_from_x0(x0, Alpha::HALF).unwrap();
            let q = period_quadrature(beta, Alpha::HALF).unwrap();
            let e17 = period_half(x0).unwrap();
            let c34 = period_half_by_beta(beta).unwrap();
            assert!((q - e17).abs() < 1e-9, "{x0}: {q} {e17}");
            assert!((c34 - e17).abs() < 1e-9, "{x0}: {c34} {e17}");
        }
    }

    #[test]
    fn half_period_limits() {
        // The loop shrinks to the equilibrium as x0 -> 1/sqrt(3) and spreads
        // towards the separatrix as x0 -> 1.
        assert!((period_half(half_x0_min() + 1e-12).unwrap() - 2.0 * PI).abs() < 1e-4);
        let mut prev = 0.0;
        for k in 1..10 {
            let x0 = 1.0 - 10f64.powi(-k);
            let p = period_half(x0).unwrap();
            assert!(p > prev);
            prev = p;
        }
        assert!(prev > 20.0);
        assert!(period_half(0.5).is_err());
    }

    #[test]
    fn closed_form_parameters() {
        let c = HalfPeriodClosedForm::new(0.8).unwrap();
        assert!(c.nu4 < 0.0);
        assert!(c.sigma2 >= 0.0 && c.sigma2 < 1.0);
        let r = 0.8 * (4.0 - 3.0 * 0.64f64).sqrt();
        assert!((c.sigma1 - 4.0 / r.sqrt()).abs() < 1e-14);
        assert!((c.sigma2 - (3.0 * 0.64 - 2.0 + r) / (2.0 * r)).abs() < 1e-14);
        assert!((imag(c.nu4) * 2.0 / c.nu3 - period_half(0.8).unwrap()).abs() < 1e-12);
    }

    fn imag(m: f64) -> f64 {
        crate::special::imaginary_modulus_k(m).unwrap()
    }

    #[test]
    fn sigma_derivatives() {
        for x0 in [0.6, 0.75, 0.9, 0.99] {
            let h = 1e-6;
            let c = HalfPeriodClosedForm::new(x0).unwrap();
            let p = HalfPeriodClosedForm::new(x0 + h).unwrap();
            let m = HalfPeriodClosedForm::new(x0 - h).unwrap();
            let fd1 = (p.sigma1 - m.sigma1) / (2.0 * h);
            let fd2 = (p.sigma2 - m.sigma2) / (2.0 * h);
            assert!((c.dsigma1() - fd1).abs() < 1e-6 * fd1.abs().max(1.0));
            assert!((c.dsigma2() - fd2).abs() < 1e-6 * fd2.abs().max(1.0));
            // Coefficients of K and E in dP/dx0.
            let k_coeff = c.dsigma1() - c.sigma1 * c.dsigma2() / (2.0 * c.sigma2);
            let e_coeff = c.sigma1 * c.dsigma2() / (2.0 * c.sigma2 * (1.0 - c.sigma2));
            assert!(k_coeff < 0.0 && e_coeff > 0.0 && c.dsigma2() > 0.0);
        }
    }

    #[test]
    fn period_derivative_against_differences() {
        for x0 in [0.5775, 0.58, 0.6, 0.7, 0.8, 0.95] {
            let h = 1e-6;
            let fd = (period_half(x0 + h).unwrap() - period_half(x0 - h).unwrap()) / (2.0 * h);
            let d = dperiod_dx0(x0).unwrap();
            assert!(d > 0.0);
            assert!((d - fd).abs() < 1e-6 * fd.abs(), "{x0}: {d} vs {fd}");
        }
        let near = dperiod_dx0(half_x0_min() + 1e-9).unwrap();
        assert!(near.is_finite() && near > 0.0);
    }

    #[test]
    fn variational_period_derivative() {
        let cfg = IntegratorConfig::default();
        for x0 in [0.65, 0.8, 0.9] {
            let v = dperiod_dx0_variational(x0, Alpha::HALF, &cfg).unwrap();
            let c = dperiod_dx0(x0).unwrap();
            assert!((v - c).abs() < 1e-7 * c, "{x0}: {v} {c}");
        }
    }

    #[test]
    fn beta_labels() {
        for a in [0.1, 0.5, 0.75, 1.0] {
            let al = alpha(a);
            assert_eq!(beta_from_x0(al.equilibrium_x(), al).unwrap(), 1.0);
            for x0 in [0.05, 0.3, 0.6, 0.95] {
                let x0 = al.equilibrium_x() + x0 * (1.0 - al.equilibrium_x());
                let beta = beta_from_x0(x0, al).unwrap();
                let vb = v_beta(beta, al).unwrap();
                let h1 = level_raw(vb.u1, vb.u2, a);
                let h2 = level_raw(x0, (1.0 - x0 * x0).sqrt(), a);
                assert!((h1 - h2).abs() < 1e-12);
                assert!((x0_from_beta(beta, al).unwrap() - x0).abs() < 1e-12);
            }
        }
        let x0 = 0.8f64;
        let beta = beta_from_x0(x0, Alpha::HALF).unwrap();
        assert!((beta.powi(3) - 1.5 * 3f64.sqrt() * (0.8 - 0.512)).abs() < 1e-15);
        let generic = beta_from_level(level_raw(x0, 0.6, 0.5), 0.5);
        assert!((generic - beta).abs() < 1e-14);
    }

    #[test]
    fn monotone_in_beta() {
        for a in [0.5, 1.0] {
            let mut prev = f64::INFINITY;
            for i in 1..=200 {
                let beta = i as f64 / 201.0;
                let p = period_quadrature(beta, alpha(a)).unwrap();
                assert!(p < prev, "{a} {beta}");
                prev = p;
            }
        }
    }

    #[test]
    fn holonomy_invariance() {
        let cfg = IntegratorConfig::default();
        let al = alpha(0.6);
        let spec = LoopSpec::from_x0(0.85, al, &cfg).unwrap();
        let dir = v_beta(spec.beta, al).unwrap();
        let h2 = holonomy_from_direction(&dir, al, &cfg).unwrap();
        assert!((holonomy(&spec) - h2).abs() < 1e-7, "{} {h2}", spec.holonomy);
        let eq = SphereState::new(0.85, (1.0f64 - 0.7225).sqrt(), 0.0).unwrap();
        let h3 = holonomy_from_direction(&eq, al, &cfg).unwrap();
        assert!((h3 - spec.holonomy).abs() < 1e-7);
        assert!((2.0 * crate::flow::symmetric_to_half_period(0.85, al, &cfg).unwrap().0 - spec.period).abs() < 1e-8);
    }
}
