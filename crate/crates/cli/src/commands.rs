use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use serde::Serialize;
use solvegeo::cutlocus::{self, GRID_INSET};
use solvegeo::flow;
use solvegeo::period;
use solvegeo::report::CheckReport;
use solvegeo::sphere::{self, DirectionGrid, DEFAULT_RADIUS, DEFAULT_RESOLUTION};
use solvegeo::{Alpha, IntegratorConfig, SphereState};

use crate::table::{num, Table, SCHEMA_VERSION};
use crate::{Command, Format, Options};

/// Beta of the loops tabulated by `table`.
const TABLE_BETA: f64 = 0.999;
/// Parameters checked by `verify` when `--alpha` is absent.
const VERIFY_ALPHAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
const VERIFY_GRID: usize = 40;
const VERIFY_HALF_GRID: usize = 1000;
const BOX_TIME_SAMPLES: usize = 1000;
const SYMMETRY_TOL: f64 = 1e-8;
const LISTED_FAILURES: usize = 50;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(solvegeo::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Compute(_) | CliError::Io(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<solvegeo::Error> for CliError {
    fn from(e: solvegeo::Error) -> Self {
        // Out-of-domain values trace back to the arguments.
        match e {
            solvegeo::Error::Domain { .. } => CliError::Usage(e.to_string()),
            e => CliError::Compute(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn run(command: Command, opts: &Options) -> CliResult<ExitCode> {
    if opts.beta.is_some() && (opts.x0.is_some() || opts.x0_range.is_some()) {
        return usage("--beta cannot be combined with --x0 or --x0-range");
    }
    if opts.x0.is_some() && opts.x0_range.is_some() {
        return usage("--x0 cannot be combined with --x0-range");
    }
    match command {
        Command::Cylinder => emit_table(opts, cylinder(opts)?),
        Command::Flow => emit_table(opts, flow_trajectory(opts)?),
        Command::Flowline => emit_table(opts, flowline(opts)?),
        Command::Period => emit_table(opts, periods(opts)?),
        Command::Table => emit_table(opts, alpha_table(opts)?),
        Command::Cutlocus => emit_table(opts, cut_locus(opts)?),
        Command::Bprime => emit_table(opts, bprime(opts)?),
        Command::GFunction => emit_table(opts, g_function(opts)?),
        Command::Sphere => sphere_mesh(opts),
        Command::Verify => verify(opts),
    }
}

fn write_output(opts: &Options, content: &str) -> CliResult<()> {
    match &opts.out {
        Some(path) => fs::write(path, content)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_table(opts: &Options, table: Table) -> CliResult<ExitCode> {
    let text = match opts.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
        Format::Obj => return usage("obj output is only available for `sphere`"),
    };
    write_output(opts, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn config(opts: &Options) -> CliResult<IntegratorConfig> {
    let cfg = IntegratorConfig::with_tol(opts.tol);
    cfg.validate()?;
    Ok(cfg)
}

fn alpha(opts: &Options) -> CliResult<Alpha> {
    match opts.alpha {
        Some(a) => Ok(Alpha::new(a)?),
        None => usage("--alpha is required"),
    }
}

fn positive_alpha(opts: &Options) -> CliResult<Alpha> {
    Ok(alpha(opts)?.require_positive()?)
}

fn samples(opts: &Options, default: usize) -> CliResult<usize> {
    match opts.samples {
        Some(0) => usage("--samples must be positive"),
        Some(n) => Ok(n),
        None => Ok(default),
    }
}

/// The loops named by `--beta`, `--x0` or `--x0-range`, as `x0` values.
fn loop_x0s(opts: &Options, alpha: Alpha) -> CliResult<Option<Vec<f64>>> {
    if let Some(beta) = opts.beta {
        return Ok(Some(vec![period::x0_from_beta(beta, alpha)?]));
    }
    if let Some(x0) = opts.x0 {
        return Ok(Some(vec![x0]));
    }
    Ok(opts.x0_range.map(|r| solvegeo::sweep::linspace(r.lo, r.hi, r.n)))
}

fn required_x0s(opts: &Options, alpha: Alpha) -> CliResult<Vec<f64>> {
    match loop_x0s(opts, alpha)? {
        Some(v) => Ok(v),
        None => usage("one of --beta, --x0 or --x0-range is required"),
    }
}

fn cylinder(opts: &Options) -> CliResult<Table> {
    let alpha = positive_alpha(opts)?;
    let beta = match (opts.beta, opts.x0) {
        (Some(b), _) => b,
        (None, Some(x0)) => period::beta_from_x0(x0, alpha)?,
        _ => return usage("--beta or --x0 is required"),
    };
    let mut t = Table::new(&["w", "z"]);
    for (w, z) in period::cylinder_slice(beta, alpha, samples(opts, 200)?)? {
        t.push(vec![w, z]);
    }
    Ok(t)
}

fn flow_trajectory(opts: &Options) -> CliResult<Table> {
    let alpha = alpha(opts)?;
    let cfg = config(opts)?;
    let (start, loop_period) = match (opts.beta, opts.x0) {
        (Some(beta), _) => {
            let s = flow::v_beta(beta, alpha)?;
            (s, opts.t_end.is_none().then(|| period::period(beta, alpha)).transpose()?)
        }
        (None, Some(x0)) => {
            let s = SphereState::new(x0, (1.0 - x0 * x0).max(0.0).sqrt(), 0.0)?;
            (s, opts.t_end.is_none().then(|| period::period_from_x0(x0, alpha)).transpose()?)
        }
        _ => return usage("--beta or --x0 is required"),
    };
    let Some(t_end) = opts.t_end.or(loop_period) else { return usage("--t-end is required") };
    let traj = flow::flow_sphere(start, t_end, alpha, &cfg)?;
    let with_level = alpha.get() > 0.0;
    let mut t = Table::new(if with_level { &["t", "u1", "u2", "u3", "level"] } else { &["t", "u1", "u2", "u3"] });
    let a = alpha.get();
    for (time, u) in traj.sample(samples(opts, 400)?) {
        let mut row = vec![time, u[0], u[1], u[2]];
        if with_level {
            row.push(u[0].abs().powf(a) * u[1]);
        }
        t.push(row);
    }
    Ok(t)
}

fn flowline(opts: &Options) -> CliResult<Table> {
    let alpha = positive_alpha(opts)?;
    let cfg = config(opts)?;
    let n = samples(opts, 200)?;
    let mut t = Table::new(&["x0", "t", "a", "b", "aprime", "bprime"]);
    for x0 in required_x0s(opts, alpha)? {
        for s in cutlocus::lambda_curve(x0, alpha, n, &cfg)? {
            t.push(vec![x0, s.t, s.a, s.b, s.aprime, s.bprime]);
        }
    }
    Ok(t)
}

fn periods(opts: &Options) -> CliResult<Table> {
    let alpha = positive_alpha(opts)?;
    let mut t = Table::new(&["alpha", "beta", "x0", "period"]);
    if let Some(beta) = opts.beta {
        t.push(vec![alpha.get(), beta, period::x0_from_beta(beta, alpha)?, period::period(beta, alpha)?]);
        return Ok(t);
    }
    for x0 in required_x0s(opts, alpha)? {
        t.push(vec![alpha.get(), period::beta_from_x0(x0, alpha)?, x0, period::period_from_x0(x0, alpha)?]);
    }
    Ok(t)
}

fn alpha_table(opts: &Options) -> CliResult<Table> {
    if opts.x0.is_some() || opts.x0_range.is_some() || opts.alpha.is_some() {
        return usage("`table` takes only --beta");
    }
    let beta = opts.beta.unwrap_or(TABLE_BETA);
    let mut t = Table::new(&["alpha", "period", "pi_sqrt2_over_sqrt_alpha"]);
    for k in 1..=10 {
        let a = k as f64 / 10.0;
        let p = period::period(beta, Alpha::new(a)?)?;
        t.push(vec![a, p, std::f64::consts::PI * 2f64.sqrt() / a.sqrt()]);
    }
    Ok(t)
}

fn boundary_grid(opts: &Options, alpha: Alpha, default_n: usize) -> CliResult<Vec<f64>> {
    match loop_x0s(opts, alpha)? {
        Some(v) => Ok(v),
        None => Ok(cutlocus::x0_grid(alpha, samples(opts, default_n)?, GRID_INSET)),
    }
}

fn cut_locus(opts: &Options) -> CliResult<Table> {
    let alpha = positive_alpha(opts)?;
    let cfg = config(opts)?;
    let grid = boundary_grid(opts, alpha, 200)?;
    let mut t = Table::new(&["x0", "a", "b", "da", "db"]);
    for p in cutlocus::boundary_curve(alpha, &grid, &cfg)? {
        t.push(vec![p.x0, p.a_end, p.b_end, p.da_dx0, p.db_dx0]);
    }
    Ok(t)
}

fn bprime(opts: &Options) -> CliResult<Table> {
    let alpha = positive_alpha(opts)?;
    let cfg = config(opts)?;
    let n = samples(opts, 400)?;
    let mut t = Table::new(&["x0", "t", "bprime"]);
    for x0 in required_x0s(opts, alpha)? {
        let t_end = match opts.t_end {
            Some(te) => te,
            None => flow::symmetric_to_half_period(x0, alpha, &cfg.without_dense())?.0,
        };
        for (time, bp) in cutlocus::bprime_trace(x0, alpha, t_end, n, &cfg)? {
            t.push(vec![x0, time, bp]);
        }
    }
    Ok(t)
}

fn g_function(opts: &Options) -> CliResult<Table> {
    if opts.alpha.is_some_and(|a| a != 0.5) {
        return usage("`g-function` is defined for alpha = 0.5 only");
    }
    let grid = match opts.x0_range {
        Some(r) => solvegeo::sweep::linspace(r.lo, r.hi, r.n),
        None => cutlocus::half_grid(samples(opts, VERIFY_HALF_GRID)?),
    };
    let mut t = Table::new(&["x0", "G"]);
    for (x0, g) in grid.iter().zip(solvegeo::sweep::map(&grid, |&x| cutlocus::g_function(x))) {
        t.push(vec![*x0, g?]);
    }
    Ok(t)
}

#[derive(Serialize)]
struct SphereFailure {
    schema_version: u32,
    check_name: &'static str,
    pass: bool,
    alpha: f64,
    radius: f64,
    vertices: usize,
    failed_count: usize,
    failed: Vec<usize>,
}

fn sphere_mesh(opts: &Options) -> CliResult<ExitCode> {
    if matches!(opts.format, Some(Format::Csv | Format::Json)) {
        return usage("`sphere` writes obj only");
    }
    let alpha = alpha(opts)?;
    let cfg = config(opts)?.without_dense();
    let radius = opts.radius.unwrap_or(DEFAULT_RADIUS);
    let (n_theta, n_phi) = opts.res.map_or(DEFAULT_RESOLUTION, |r| (r.n_theta, r.n_phi));
    let grid = DirectionGrid::new(n_theta, n_phi)?;
    let mesh = sphere::geodesic_sphere(alpha, radius, &grid, &cfg)?;
    write_output(opts, &sphere::obj_string(&mesh))?;
    if mesh.is_complete() {
        return Ok(ExitCode::SUCCESS);
    }
    let detail = SphereFailure {
        schema_version: SCHEMA_VERSION,
        check_name: "sphere_mesh",
        pass: false,
        alpha: alpha.get(),
        radius,
        vertices: mesh.vertices.len(),
        failed_count: mesh.failed.len(),
        failed: mesh.failed.iter().copied().take(LISTED_FAILURES).collect(),
    };
    eprintln!("{}", serde_json::to_string_pretty(&detail).expect("serialises"));
    Ok(ExitCode::from(1))
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: u32,
    seed: u64,
    tol: f64,
    alphas: Vec<f64>,
    /// Every non-exploratory check passed.
    pass: bool,
    checks: Vec<CheckReport>,
}

fn verify_alpha(alpha: Alpha, opts: &Options, cfg: &IntegratorConfig) -> CliResult<Vec<CheckReport>> {
    let grid = boundary_grid(opts, alpha, VERIFY_GRID)?;
    let loops = match loop_x0s(opts, alpha)? {
        Some(v) => v,
        None => cutlocus::identity_grid(alpha, VERIFY_GRID),
    };
    let cases: Vec<(Alpha, f64)> = grid.iter().map(|&x| (alpha, x)).collect();
    let mut out = vec![
        cutlocus::check_bounding_box(&cases, BOX_TIME_SAMPLES, cfg),
        cutlocus::check_holonomy_monotone(alpha, &grid, cfg),
        cutlocus::partner_report(alpha, &loops, cfg),
        cutlocus::reciprocity_report(alpha, &loops, cfg),
        cutlocus::check_monotonicity(alpha, &grid, 0.0, cfg),
        cutlocus::check_boundary_ordering(alpha, &grid, cfg),
        cutlocus::boundary_symmetry_report(alpha, &loops, SYMMETRY_TOL, cfg),
    ];
    if alpha.is_half() {
        let half = match loop_x0s(opts, alpha)? {
            Some(v) => v,
            None => cutlocus::half_grid(VERIFY_HALF_GRID),
        };
        out.push(cutlocus::check_g_negative(&half));
        out.push(cutlocus::check_g_ratio(&half));
        out.push(cutlocus::half_period_zbar_report(&loops, cfg));
        out.push(cutlocus::half_period_end_bars_report(&loops, cfg));
    }
    Ok(out)
}

fn verify(opts: &Options) -> CliResult<ExitCode> {
    if matches!(opts.format, Some(Format::Csv | Format::Obj)) {
        return usage("`verify` writes json only");
    }
    let cfg = config(opts)?;
    let alphas: Vec<Alpha> = match opts.alpha {
        Some(_) => vec![positive_alpha(opts)?],
        None => VERIFY_ALPHAS.iter().map(|&a| Alpha::new(a)).collect::<Result<_, _>>()?,
    };
    let mut checks = Vec::new();
    for &alpha in &alphas {
        for r in verify_alpha(alpha, opts, &cfg)? {
            let status = match (r.pass, r.exploratory) {
                (true, _) => "PASS",
                (false, false) => "FAIL",
                (false, true) => "FINDING",
            };
            eprintln!(
                "{status} alpha={} {} worst_margin={} points={}",
                num(alpha.get()),
                r.check_name,
                num(r.worst_margin),
                r.points
            );
            checks.push(r);
        }
    }
    let pass = checks.iter().all(|c| c.pass || c.exploratory);
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        tol: opts.tol,
        alphas: alphas.iter().map(|a| a.get()).collect(),
        pass,
        checks,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
    text.push('\n');
    write_output(opts, &text)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
