//! Command-line front end for the `lrspp` simulator.
//!
//! Each subcommand writes a plot-ready dataset as CSV or JSON. Exit codes:
//! 0 on success, 1 for configuration or I/O problems, 2 for numerical
//! failures.

pub mod commands;
pub mod config;
pub mod dataset;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{validate_config, BranchSelection, Format, MaterialSpec, RawConfig, RunConfig};
use dataset::Dataset;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "LRSPP_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lrspp",
    version,
    about = "Photon to long-range surface plasmon datasets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Metal permittivity over the ω grid.
    Material,
    /// Branch frequencies, decay constants, group velocity and loss over (d1, k).
    Dispersion,
    /// Prism coupling angle over (d1, ω).
    Angle,
    /// Normalized strip mode and coupler field over z at one (ω, d1, d2).
    Field,
    /// Constraint parameters at the optimized gap over (ω, d1).
    Constraints,
    /// Constrained coupling optimization along ω.
    Optimize {
        /// Emit every (ω, d1) cell instead of the best d1 per ω.
        #[arg(long)]
        surface: bool,
    },
    /// Normalized detected count along the strip at the optimized coupling.
    Propagate,
    /// Second-order coherence of number states, before and after loss.
    G2,
    /// Entropy of transferred cat states along the strip.
    CatEntropy,
}

#[derive(Debug, Args)]
struct Opts {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<Format>,
    #[arg(long, global = true, value_name = "plus|minus|both")]
    branch: Option<BranchSelection>,
    /// Material preset name.
    #[arg(long, global = true)]
    material: Option<String>,
    /// Worker threads (0 or absent: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    /// Single frequency (rad/s).
    #[arg(long, global = true)]
    omega: Option<f64>,
    #[arg(long, global = true)]
    omega_min: Option<f64>,
    #[arg(long, global = true)]
    omega_max: Option<f64>,
    #[arg(long, global = true)]
    omega_steps: Option<usize>,
    /// Single strip thickness (nm).
    #[arg(long, global = true)]
    d1_nm: Option<f64>,
    #[arg(long, global = true, value_name = "NM")]
    d1_min: Option<f64>,
    #[arg(long, global = true, value_name = "NM")]
    d1_max: Option<f64>,
    #[arg(long, global = true)]
    d1_steps: Option<usize>,
    /// Fixed prism gap for `field` (nm).
    #[arg(long, global = true)]
    d2_nm: Option<f64>,
    #[arg(long, global = true, value_name = "NM")]
    d2_min: Option<f64>,
    #[arg(long, global = true, value_name = "NM")]
    d2_max: Option<f64>,
    #[arg(long, global = true)]
    d2_steps: Option<usize>,
    #[arg(long, global = true, value_name = "1/M")]
    k_min: Option<f64>,
    #[arg(long, global = true, value_name = "1/M")]
    k_max: Option<f64>,
    #[arg(long, global = true)]
    k_steps: Option<usize>,
    #[arg(long, global = true, value_name = "UM")]
    x_min: Option<f64>,
    #[arg(long, global = true, value_name = "UM")]
    x_max: Option<f64>,
    #[arg(long, global = true)]
    x_steps: Option<usize>,
    #[arg(long, global = true, value_name = "NM", allow_hyphen_values = true)]
    z_min: Option<f64>,
    #[arg(long, global = true, value_name = "NM", allow_hyphen_values = true)]
    z_max: Option<f64>,
    #[arg(long, global = true)]
    z_steps: Option<usize>,
    /// Single cat amplitude.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    alpha_min: Option<f64>,
    #[arg(long, global = true)]
    alpha_max: Option<f64>,
    #[arg(long, global = true)]
    alpha_steps: Option<usize>,

    /// Photon bandwidth Δω (rad/s).
    #[arg(long, global = true)]
    delta_omega: Option<f64>,
    #[arg(long, global = true)]
    eps_prism: Option<f64>,
    /// Detector efficiency.
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Photon number for `g2`.
    #[arg(long, global = true)]
    n: Option<u32>,
}

impl Opts {
    fn raw(&self) -> RawConfig {
        RawConfig {
            material: self.material.clone().map(MaterialSpec::Name),
            branch: self.branch,
            format: self.format,
            out: self.out.clone(),
            omega: self.omega,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            omega_steps: self.omega_steps,
            d1_nm: self.d1_nm,
            d1_min: self.d1_min,
            d1_max: self.d1_max,
            d1_steps: self.d1_steps,
            d2_nm: self.d2_nm,
            d2_min: self.d2_min,
            d2_max: self.d2_max,
            d2_steps: self.d2_steps,
            k_min: self.k_min,
            k_max: self.k_max,
            k_steps: self.k_steps,
            x_min: self.x_min,
            x_max: self.x_max,
            x_steps: self.x_steps,
            z_min: self.z_min,
            z_max: self.z_max,
            z_steps: self.z_steps,
            alpha: self.alpha,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            alpha_steps: self.alpha_steps,
            delta_omega: self.delta_omega,
            eps_prism: self.eps_prism,
            mu: self.mu,
            n: self.n,
        }
    }
}

fn load_config(opts: &Opts) -> Result<RunConfig, CliError> {
    let file = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            RawConfig::from_json(&text)?
        }
        None => RawConfig::default(),
    };
    validate_config(&file.merge(opts.raw()))
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<Dataset, CliError> {
    match command {
        Command::Material => commands::material(cfg),
        Command::Dispersion => commands::dispersion(cfg),
        Command::Angle => commands::angle(cfg),
        Command::Field => commands::field(cfg),
        Command::Constraints => commands::constraints(cfg),
        Command::Optimize { surface } => commands::optimize(cfg, *surface),
        Command::Propagate => commands::propagate(cfg),
        Command::G2 => commands::g2(cfg),
        Command::CatEntropy => commands::cat_entropy(cfg),
    }
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(&cli.opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let ds = pool.install(|| execute(&cli.command, &cfg))?;
    for w in &ds.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let bytes = ds.encode(cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => stdout
            .write_all(&bytes)
            .map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                1
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };
    match run_parsed(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "lrspp: {e}");
            e.exit_code()
        }
    }
}

/// Runs the CLI on the process streams. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
