//! Command-line front end: each command reads an optional JSON config,
//! overrides it with flags, runs, and writes its artifacts plus a JSON report.

use std::ffi::OsString;

use clap::{Parser, Subcommand};
use serde_json::json;
use universality_lab::LabError;

pub mod commands;
pub mod config;
pub mod parse;

use commands::*;
use config::{load_file, usage, CliError};

#[derive(Parser, Debug)]
#[command(name = "ulab", version, about = "Holomorphic dynamics and universality experiments")]
pub struct Cli {
    /// JSON file of parameters for the command; flags take precedence
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find and classify a fixed point
    Classify(ClassifyFlags),
    /// Rasterize the basin of attraction of a fixed point
    Basin(BasinFlags),
    /// Tabulate the linearizing coordinate and its functional-equation residual
    ChartTable(ChartTableFlags),
    /// Render the spiral-cut domain G0 with complement statistics
    RenderG0(RenderG0Flags),
    /// Least-squares rational fit of a target on a disk or circle
    RungeFit(RungeFitFlags),
    /// Build a finite universal schedule or a finite-set interpolation
    UniversalBuild(UniversalBuildFlags),
    /// Fiber check of g∘fⁿ from a schedule against the Koenigs coordinate
    OmegaCheck(OmegaCheckFlags),
    /// Fill the holes of a mask that avoid the excluded points
    Hull(HullFlags),
    /// Hausdorff distance of two point clouds or masks
    Hausdorff(HausdorffFlags),
    /// Box-counting dimension of a mask
    Boxdim(BoxdimFlags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Basin(_) => "basin",
            Command::ChartTable(_) => "chart-table",
            Command::RenderG0(_) => "render-g0",
            Command::RungeFit(_) => "runge-fit",
            Command::UniversalBuild(_) => "universal-build",
            Command::OmegaCheck(_) => "omega-check",
            Command::Hull(_) => "hull",
            Command::Hausdorff(_) => "hausdorff",
            Command::Boxdim(_) => "boxdim",
        }
    }
}

const THREADS_VAR: &str = "UNIVERSALITY_LAB_THREADS";

fn init_threads() -> Result<(), CliError> {
    let n = match std::env::var(THREADS_VAR) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| usage(format!("{THREADS_VAR} must be a count, got {v:?}")))?,
        Err(_) => 0,
    };
    if n > 0 {
        // fails only if a pool already exists, as in repeated in-process runs
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let name = cli.command.name();
    let file = cli.config.as_deref().map(|p| load_file(p, name)).transpose()?;
    match &cli.command {
        Command::Classify(f) => classify(file, f),
        Command::Basin(f) => basin(file, f),
        Command::ChartTable(f) => chart_table(file, f),
        Command::RenderG0(f) => render_g0(file, f),
        Command::RungeFit(f) => runge_fit(file, f),
        Command::UniversalBuild(f) => universal_build(file, f),
        Command::OmegaCheck(f) => omega_check(file, f),
        Command::Hull(f) => hull(file, f),
        Command::Hausdorff(f) => hausdorff(file, f),
        Command::Boxdim(f) => boxdim(file, f),
    }
}

/// Machine-readable description of a library error.
pub fn error_json(e: &LabError) -> serde_json::Value {
    let mut v = json!({ "error": e.root().code(), "message": e.to_string() });
    if let LabError::Step { index, .. } = e {
        v["step"] = json!(index);
    }
    match e.root() {
        LabError::InjectivityViolated { n, i, j } => {
            v["n"] = json!(n);
            v["pair"] = json!([i, j]);
        }
        LabError::ApproximationFailed { best_error } => v["best_error"] = json!(best_error),
        LabError::HoleInTarget { holes } => v["holes"] = json!(holes),
        _ => {}
    }
    v
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            match &err {
                CliError::Usage(msg) => eprintln!("error: {msg}\n\nFor more information, try '--help'."),
                CliError::Lab(e) => eprintln!("{}", error_json(e)),
            }
            err.exit_code()
        }
    }
}
