//! `fzeta`: batch front end for fzeta-core. Every command writes one CSV or
//! JSON artifact (stdout or `--out`); identical arguments give identical
//! bytes.
//!
//! Exit codes: 0 ok, 1 configuration error, 2 numerical failure,
//! 3 verification failure.

mod commands;
mod output;
mod target;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fzeta", version, about = "Fractal zeta functions: evaluation, poles, residues, tubes, fits, checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Build a fractal string from --spec and list its leading lengths
    Construct,
    /// Evaluate a zeta function at the --s points
    Eval,
    /// Poles of a catalog zeta function in a window
    Poles,
    /// Residues: by contour for catalogs, from the tube profile for sets
    Residues,
    /// Sample the tube function |A_t| of a set
    Tube,
    /// Minkowski dimension and content bounds from the sampled tube
    Fit,
    /// Run a verification (--check); exit 3 when it fails
    Verify,
    /// Fit, residues and checks for one target in a single document
    Report,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Named closed-form zeta function (see README for the list)
    #[arg(long, global = true, conflicts_with_all = ["spec", "set"])]
    pub catalog: Option<String>,
    /// JSON file holding a string spec or a bounded-set spec
    #[arg(long, global = true, conflicts_with = "set")]
    pub spec: Option<PathBuf>,
    /// Named set: cantor, generalized-cantor, carpet, a-string
    #[arg(long, global = true)]
    pub set: Option<String>,
    /// Evaluation point, repeatable: --s RE IM
    #[arg(long, global = true, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub s: Vec<f64>,
    /// Add N seeded random points right of the critical line
    #[arg(long, global = true, value_name = "N")]
    pub random_s: Option<usize>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Summation accuracy, or the tolerance of a check
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Grid size for planar quadrature (power of two)
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub im_range: Vec<f64>,
    #[arg(long, global = true, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub re_range: Vec<f64>,
    /// Fourier modes |k| <= k_max
    #[arg(long, global = true, default_value_t = 5)]
    pub k_max: usize,
    /// Contour radius
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// functional-equation, residue-content or catalog-residues
    #[arg(long, global = true)]
    pub check: Option<String>,
    /// Smallest sampled radius of the tube
    #[arg(long, global = true)]
    pub t_min: Option<f64>,
    /// Largest sampled radius of the tube (default: delta for sets in R,
    /// 1e-8 in the plane)
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Tube samples per decade of t (default 32 in R, 1024 in the plane)
    #[arg(long, global = true)]
    pub per_decade: Option<usize>,
    /// Oscillation period T in log(1/t), when not known for the set
    #[arg(long, global = true)]
    pub period: Option<f64>,
    /// Parameter m of generalized Cantor sets and grills
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Parameter a of generalized Cantor sets and a-strings
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Pole order, or number of terms of a truncated series
    #[arg(long, global = true)]
    pub n: Option<i64>,
    /// Number of length groups listed by construct
    #[arg(long, global = true, default_value_t = 20)]
    pub count: usize,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Failure {
        Failure { code: 1, msg: msg.into() }
    }

    pub fn verification(msg: impl Into<String>) -> Failure {
        Failure { code: 3, msg: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

/// Attaches the operation name to a library error and sorts it into
/// configuration (bad inputs) or numerical failures.
pub fn at(op: &'static str) -> impl Fn(fzeta_core::Error) -> Failure {
    use fzeta_core::Error as E;
    move |e| {
        let code = match e {
            E::InvalidSpec(_)
            | E::InvalidRatios(_)
            | E::InvalidOrder(_)
            | E::InvalidParameters(_)
            | E::DeltaTooSmall { .. }
            | E::DimensionMismatch(_)
            | E::OutOfRange { .. } => 1,
            _ => 2,
        };
        Failure { code, msg: format!("{op}: {e}") }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command, &cli.opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fzeta: {f}");
            ExitCode::from(f.code)
        }
    }
}
