//! `solvegeo`: file-based front end to the solvegeo library.
//!
//! Every subcommand writes CSV (header row, 12 significant digits) or JSON
//! to `--out` or standard output. Exit status is 0 on success, 1 when a
//! computation or a requested check fails, and 2 on usage errors.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "solvegeo", version, about = "Geodesics, periods and cut loci of the solvable groups G_alpha")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Slice (w, z) of the cylinder that carries the geodesics of a loop.
    Cylinder,
    /// Trajectory of the structure field on the unit tangent sphere.
    Flow,
    /// Endpoint curve (a, b) of symmetric geodesics over one half period.
    Flowline,
    /// Periods of loop level sets.
    Period,
    /// Periods at beta = 0.999 for alpha = 0.1, 0.2, ..., 1 beside pi sqrt(2/alpha).
    Table,
    /// The boundary of the cut locus in the positive sector of the plane z = 0.
    Cutlocus,
    /// Traces of b' along symmetric flowlines.
    Bprime,
    /// Geodesic sphere mesh as OBJ.
    Sphere,
    /// Runs the property checks and writes a JSON report.
    Verify,
    /// The function G(x0) for alpha = 1/2.
    GFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Obj,
}

/// `lo:hi:n`, `n` points with both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else { return Err(format!("expected lo:hi:n, got `{s}`")) };
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad point count `{n}`"))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("need finite lo <= hi, got {lo}:{hi}"));
        }
        if n == 0 {
            return Err("point count must be positive".into());
        }
        Ok(Range { lo, hi, n })
    }
}

/// `N,M`: `N` latitude rings and `M` meridians.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected N,M, got `{s}`"))?;
        let n_theta = a.trim().parse().map_err(|_| format!("bad ring count `{a}`"))?;
        let n_phi = b.trim().parse().map_err(|_| format!("bad meridian count `{b}`"))?;
        Ok(Resolution { n_theta, n_phi })
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Group parameter in [-1, 1].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Loop label in (0, 1); excludes --x0 and --x0-range.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Loop label: the first sphere coordinate where the loop meets the equator.
    #[arg(long, global = true)]
    pub x0: Option<f64>,
    /// Grid of x0 values, `lo:hi:n`.
    #[arg(long = "x0-range", global = true, value_name = "LO:HI:N")]
    pub x0_range: Option<Range>,
    /// Geodesic sphere radius.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Sphere mesh resolution `rings,meridians`; meridians a multiple of 4.
    #[arg(long, global = true, value_name = "N,M")]
    pub res: Option<Resolution>,
    /// Relative and absolute integrator tolerance.
    #[arg(long, global = true, default_value = "1e-12")]
    pub tol: f64,
    /// Number of samples or grid points; the default depends on the subcommand.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// End time of sampled trajectories.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table format (csv by default, or json); `sphere` writes obj.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Reserved; recorded in reports, no computation is randomised.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    solvegeo::sweep::init_threads_from_env();
    let cli = Cli::parse();
    match commands::run(cli.command, &cli.opts) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
