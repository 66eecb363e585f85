//! Adaptive Dormand–Prince 5(4) integration with continuous output and
//! sign-change event location.
//!
//! States are fixed-size arrays so that every system in the crate (3, 6, 5
//! and 10 components) runs without heap allocation per stage.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerances and limits for [`solve`] and [`solve_until`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on `|h|`.
    pub max_step: f64,
    /// Keep the interpolation coefficients of every step so the trajectory
    /// can be evaluated at arbitrary times.
    pub dense_output: bool,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            dense_output: true,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Same relative and absolute tolerance.
    pub fn with_tol(tol: f64) -> Self {
        IntegratorConfig { rel_tol: tol, abs_tol: tol, ..Default::default() }
    }

    pub fn without_dense(mut self) -> Self {
        self.dense_output = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(crate::error::domain("rel_tol", self.rel_tol, "(0, inf)"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(crate::error::domain("abs_tol", self.abs_tol, "(0, inf)"));
        }
        if !(self.max_step > 0.0) {
            return Err(crate::error::domain("max_step", self.max_step, "(0, inf]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.r;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

/// Accepted steps of an integration. Times are monotone in the direction of
/// integration (increasing or decreasing).
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    segments: Vec<Segment<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("trajectory has a start point")
    }

    pub fn last(&self) -> [f64; N] {
        *self.y.last().expect("trajectory has a start point")
    }

    pub fn has_dense(&self) -> bool {
        self.segments.len() + 1 == self.t.len()
    }

    /// State at time `t` from the continuous extension. Returns `None` when
    /// `t` is outside the integrated range or dense output was disabled.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        let (a, b) = (self.t_start(), self.t_end());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        // Accept requests a few ulps outside the span, as produced by
        // accumulating grid arithmetic.
        let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return None;
        }
        let t = t.clamp(lo, hi);
        if t == b {
            return Some(self.last());
        }
        if t == a {
            return Some(self.y[0]);
        }
        if !self.has_dense() {
            return None;
        }
        let forward = b >= a;
        // First knot strictly past t in the direction of integration.
        let idx = self.t.partition_point(|&s| if forward { s <= t } else { s >= t });
        let seg = idx.saturating_sub(1).min(self.segments.len() - 1);
        Some(self.segments[seg].eval(t))
    }

    /// `n` equally spaced samples over the integrated range, endpoints
    /// included.
    pub fn sample(&self, n: usize) -> Vec<(f64, [f64; N])> {
        crate::sweep::linspace(self.t_start(), self.t_end(), n)
            .into_iter()
            .filter_map(|t| self.eval(t).map(|y| (t, y)))
            .collect()
    }
}

/// Which sign changes of the event function count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Any,
    /// From positive to negative.
    Falling,
    /// From negative to positive.
    Rising,
}

impl Crossing {
    fn matches(self, before: f64, after: f64) -> bool {
        match self {
            Crossing::Any => after == 0.0 || (after > 0.0) != (before > 0.0),
            Crossing::Falling => before > 0.0 && after <= 0.0,
            Crossing::Rising => before < 0.0 && after >= 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

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

struct Step<const N: usize> {
    y_new: [f64; N],
    k7: [f64; N],
    err: f64,
    dense: [[f64; N]; 5],
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let hc = h * c;
        for i in 0..N {
            out[i] += hc * k[i];
        }
    }
    out
}

fn dopri_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64, cfg: &IntegratorConfig) -> Step<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new);
    let mut sq = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
        sq += (e / sk) * (e / sk);
    }
    let err = (sq / N as f64).sqrt();
    let mut dense = [[0.0; N]; 5];
    for i in 0..N {
        let diff = y_new[i] - y[i];
        let bspl = h * k1[i] - diff;
        dense[0][i] = y[i];
        dense[1][i] = diff;
        dense[2][i] = bspl;
        dense[3][i] = diff - h * k7[i] - bspl;
        dense[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Step { y_new, k7, err, dense }
}

fn scaled_norm<const N: usize>(v: &[f64; N], y: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        s += (v[i] / sk).powi(2);
    }
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], f0: &[f64; N], dir: f64, cfg: &IntegratorConfig) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let d0 = scaled_norm(y, y, cfg);
    let d1 = scaled_norm(f0, y, cfg);
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.max_step);
    let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
    let f1 = f(t + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scaled_norm(&diff, y, cfg) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

struct EventSpec<'a, const N: usize> {
    g: &'a dyn Fn(f64, &[f64; N]) -> f64,
    crossing: Crossing,
    terminal: bool,
}

fn run<const N: usize, F>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    event: Option<EventSpec<'_, N>>,
) -> Result<(Trajectory<N>, Vec<Event<N>>)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::Integrator { t_reached: t0, reason: "non-finite time span" });
    }
    let mut traj = Trajectory { t: vec![t0], y: vec![y0], segments: Vec::new() };
    let mut events = Vec::new();
    if t_end == t0 {
        return Ok((traj, events));
    }
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.1;
    const FAC_MAX: f64 = 5.0;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(f, t, &y, &k1, dir, cfg);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut g_prev = event.as_ref().map(|e| (e.g)(t, &y));
    let mut steps = 0usize;

    loop {
        if steps >= cfg.max_steps {
            return Err(Error::Integrator { t_reached: t, reason: "step budget exhausted" });
        }
        steps += 1;
        if (t_end - t) * dir <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            *traj.t.last_mut().expect("start point") = t_end;
            return Ok((traj, events));
        }
        let mut last = false;
        if (t + dir * h - t_end) * dir >= 0.0 {
            h = (t_end - t).abs();
            last = true;
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Integrator { t_reached: t, reason: "step size underflow" });
        }
        let hs = dir * h;
        let step = dopri_step(f, t, &y, &k1, hs, cfg);
        if !step.err.is_finite() || step.y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        let fac11 = step.err.powf(EXPO1);
        if step.err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            fac_old = step.err.max(1e-4);
            last_rejected = false;

            let t_new = if last { t_end } else { t + hs };
            let seg = Segment { t0: t, h: hs, r: step.dense };

            if let (Some(spec), Some(gp)) = (event.as_ref(), g_prev) {
                let g_new = (spec.g)(t_new, &step.y_new);
                if gp != 0.0 && spec.crossing.matches(gp, g_new) {
                    let te = locate(&seg, spec.g, t, t_new, gp);
                    let ye = if te == t_new { step.y_new } else { dopri_step(f, t, &y, &k1, te - t, cfg).y_new };
                    events.push(Event { t: te, y: ye });
                    if spec.terminal {
                        traj.t.push(te);
                        traj.y.push(ye);
                        if cfg.dense_output {
                            traj.segments.push(seg);
                        }
                        return Ok((traj, events));
                    }
                }
                g_prev = Some(g_new);
            }

            traj.t.push(t_new);
            traj.y.push(step.y_new);
            if cfg.dense_output {
                traj.segments.push(seg);
            }
            t = t_new;
            y = step.y_new;
            k1 = step.k7;
            if last {
                return Ok((traj, events));
            }
            h = h_new.min(cfg.max_step);
        } else {
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}

/// Bisection for the sign change of `g` on one step's continuous extension.
fn locate<const N: usize>(seg: &Segment<N>, g: &dyn Fn(f64, &[f64; N]) -> f64, ta: f64, tb: f64, ga: f64) -> f64 {
    let (mut a, mut b) = (ta, tb);
    let sa = ga.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b || (b - a).abs() <= 1e-15 * m.abs().max(1.0) {
            break;
        }
        let gm = g(m, &seg.eval(m));
        if gm == 0.0 {
            return m;
        }
        if gm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
pub fn solve<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    run(&f, t0, y0, t_end, cfg, None).map(|(traj, _)| traj)
}

/// Integrates over the whole span and records every qualifying sign change
/// of `g` (excluding a zero at the start).
pub fn solve_with_events<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    cfg: &IntegratorConfig,
    g: G,
    crossing: Crossing,
) -> Result<(Trajectory<N>, Vec<Event<N>>)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> f64,
{
    let spec = EventSpec { g: &g, crossing, terminal: false };
    run(&f, t0, y0, t_end, cfg, Some(spec))
}

/// Integrates until the first qualifying sign change of `g` after the start,
/// or fails with [`Error::EventNotFound`] at `t_max`. A zero of `g` at the
/// initial point itself is not an event.
pub fn solve_until<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_max: f64,
    cfg: &IntegratorConfig,
    g: G,
    crossing: Crossing,
) -> Result<(Trajectory<N>, Event<N>)>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> f64,
{
    let spec = EventSpec { g: &g, crossing, terminal: true };
    let (traj, events) = run(&f, t0, y0, t_max, cfg, Some(spec))?;
    match events.first() {
        Some(e) => Ok((traj, *e)),
        None => Err(Error::EventNotFound { t_max }),
    }
}
