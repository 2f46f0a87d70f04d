//! Argument definitions and dispatch for the `fdvar` binary.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::commands::{
    cmd_closed_form, cmd_critical, cmd_eval, cmd_fit, cmd_subcritical, cmd_sweep, cmd_verify, read_experiment, EvalGrid,
};
use super::io::{read_dataset, ConfigLayer};
use super::verify::VerifyOptions;
use crate::closed_form::ClosedFormParams;
use crate::critical::log_spaced_decreasing;
use crate::error::{Error, Result};
use crate::spectral::Backend;

#[derive(Debug, Parser)]
#[command(name = "fdvar", version, about = "Sobolev-penalized spectral interpolation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a dataset and write the model JSON.
    Fit(FitArgs),
    /// Evaluate a saved model on a grid.
    Eval(EvalArgs),
    /// Run an experiment spec.
    Sweep(SweepArgs),
    /// Run the built-in check suite.
    Verify(VerifyArgs),
    /// Gaussian Sobolev norm against σ.
    Critical(CriticalArgs),
    /// Norm of the RBF construction against σ.
    Subcritical(SubcriticalArgs),
    /// One-point closed-form reconstruction.
    ClosedForm(ClosedFormArgs),
}

#[derive(Debug, Args, Default)]
pub struct ConfigFlags {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "M", short = 'M')]
    pub m: Option<usize>,
    #[arg(long)]
    pub delta_xi: Option<f64>,
    #[arg(long)]
    pub backend: Option<Backend>,
    #[arg(long)]
    pub solve_tolerance: Option<f64>,
    #[arg(long)]
    pub hermitian_projection: Option<bool>,
    #[arg(long)]
    pub riemann_normalize: Option<bool>,
    #[arg(long)]
    pub exclude_zero_mode: Option<bool>,
    #[arg(long)]
    pub memory_budget_bytes: Option<u64>,
}

impl From<&ConfigFlags> for ConfigLayer {
    fn from(f: &ConfigFlags) -> Self {
        ConfigLayer {
            alpha: f.alpha,
            lambda: f.lambda,
            m: f.m,
            delta_xi: f.delta_xi,
            backend: f.backend,
            solve_tolerance: f.solve_tolerance,
            hermitian_projection: f.hermitian_projection,
            riemann_normalize: f.riemann_normalize,
            exclude_zero_mode: f.exclude_zero_mode,
            memory_budget_bytes: f.memory_budget_bytes,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct GridFlags {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

impl From<GridFlags> for EvalGrid {
    fn from(g: GridFlags) -> Self {
        EvalGrid {
            lo: g.lo,
            hi: g.hi,
            points: g.points,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub grid: GridFlags,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Experiment spec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of random instances for the backend and optimality checks.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
}

#[derive(Debug, Args)]
pub struct SigmaFlags {
    /// Explicit σ values; overrides the log-spaced range.
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-1)]
    pub sigma_hi: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub sigma_lo: f64,
    #[arg(long, default_value_t = 21)]
    pub count: usize,
}

impl SigmaFlags {
    fn values(&self) -> Vec<f64> {
        self.sigmas
            .clone()
            .unwrap_or_else(|| log_spaced_decreasing(self.sigma_hi, self.sigma_lo, self.count))
    }
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[arg(long, short)]
    pub d: usize,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub sigma: SigmaFlags,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Verdict JSON path.
    #[arg(long)]
    pub verdict: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubcriticalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub sigma: SigmaFlags,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClosedFormArgs {
    #[arg(long = "M", short = 'M', default_value_t = 1000)]
    pub m: usize,
    #[arg(long, default_value_t = 0.01)]
    pub delta_xi: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[command(flatten)]
    pub grid: GridFlags,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Fit(a) => {
            cmd_fit(a.config.as_deref(), &(&a.flags).into(), &a.data, &a.out, out)?;
        }
        Command::Eval(a) => {
            cmd_eval(&a.model, &a.grid.into(), a.out.as_deref(), out, err)?;
        }
        Command::Sweep(a) => {
            let spec = read_experiment(&a.spec)?;
            let base = a.spec.parent().map(|p| p.to_path_buf()).unwrap_or_default();
            cmd_sweep(&spec, &base, &a.out_dir, out)?;
        }
        Command::Verify(a) => {
            let opts = VerifyOptions {
                instances: a.instances,
                ..VerifyOptions::default()
            };
            if !cmd_verify(&opts, out)? {
                return Ok(1);
            }
        }
        Command::Critical(a) => {
            cmd_critical(a.d, a.alpha, &a.sigma.values(), a.out.as_deref(), a.verdict.as_deref(), out)?;
        }
        Command::Subcritical(a) => {
            let data = read_dataset(&a.data)?;
            let slope = cmd_subcritical(&data, a.alpha, &a.sigma.values(), a.out.as_deref(), out)?;
            writeln!(err, "fitted slope {slope:.4}, expected {}", data.dim() as f64 - a.alpha)?;
        }
        Command::ClosedForm(a) => {
            let params = ClosedFormParams::new(a.m, a.delta_xi, a.alpha, a.lambda)?;
            cmd_closed_form(&params, &a.grid.into(), a.out.as_deref(), out)?;
        }
    }
    Ok(0)
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Applies `FDVAR_THREADS` to the global rayon pool.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::parse("FDVAR_THREADS", format!("expected a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::parse("FDVAR_THREADS", e.to_string()))
}
