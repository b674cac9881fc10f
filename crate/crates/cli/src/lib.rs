//! `ttc-body` command-line pipeline.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on bad usage.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{HUMANS_FILE, META_FILE, REPORT_CSV, REPORT_JSON, SCENARIOS_FILE, SWEEP_FILE, TTC_FILE};

/// Environment variable that supplies `--out` when the flag is absent.
pub const OUT_ENV: &str = "TTC_BODY_OUT";

#[derive(Debug, Parser)]
#[command(name = "ttc-body", version, about = "Synthetic collision stimuli, mask-based TTC and alignment metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render single-polygon images and masks for segmentation training.
    GenDataset(GenDatasetArgs),
    /// Generate matched concave/convex collision pairs over a τ grid.
    GenScenarios(GenScenariosArgs),
    /// Synthesize human responses for a video metadata file.
    GenHumans(GenHumansArgs),
    /// Compute model TTC for every scenario in a manifest.
    RunTtc(RunTtcArgs),
    /// Compare model TTCs against human responses.
    Compare(CompareArgs),
    /// Sweep a coarsening operator and report the alignment-error curve.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output directory (created if missing).
    #[arg(long, env = OUT_ENV)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    #[arg(long, default_value_t = 500)]
    pub train: usize,
    #[arg(long, default_value_t = 200)]
    pub val: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator config JSON; fields left out keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct GenScenariosArgs {
    #[arg(long)]
    pub pairs: usize,
    /// Comma-separated ground-truth TTCs in seconds, assigned to pairs round-robin.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5,2.0")]
    pub taus: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Agent velocity `x,y` in pixels per frame.
    #[arg(long, default_value = "3,0", allow_hyphen_values = true)]
    pub v_agent: String,
    /// Patient velocity `x,y` in pixels per frame.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub v_patient: String,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct GenHumansArgs {
    /// Video metadata JSON (as written by gen-scenarios).
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub participants: usize,
    #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
    pub bias_concave: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub bias_convex: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args, Clone)]
pub struct MaskSourceArgs {
    /// Read `<id>_agent.png` / `<id>_patient.png` (with origin sidecars) from here.
    #[arg(long, conflicts_with = "pmap_dir")]
    pub masks_dir: Option<PathBuf>,
    /// Read `<id>.pmap` or `<id>.npy` probability maps from here and segment them.
    #[arg(long)]
    pub pmap_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunTtcArgs {
    #[arg(long)]
    pub scenarios: PathBuf,
    #[command(flatten)]
    pub source: MaskSourceArgs,
    /// Coarsening applied to each object mask, as `kind:strength`.
    #[arg(long, default_value = "identity")]
    pub coarsen: String,
    /// Simulated seconds before a scenario counts as non-colliding.
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Model TTC CSV from run-ttc.
    #[arg(long)]
    pub ttc: PathBuf,
    #[arg(long)]
    pub humans: PathBuf,
    /// Video metadata JSON for the human videos.
    #[arg(long)]
    pub meta: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(long)]
    pub humans: PathBuf,
    /// Video metadata JSON for the human videos; derived from the scenarios when absent.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Comma-separated `kind:strength` operators.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["kind", "strengths"])]
    pub ops: Vec<String>,
    /// Operator kind for `--strengths`.
    #[arg(long, requires = "strengths")]
    pub kind: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub strengths: Vec<f64>,
    #[command(flatten)]
    pub source: MaskSourceArgs,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Minimum rise from the minimum to each endpoint for a U verdict (seconds).
    #[arg(long, default_value_t = 0.02)]
    pub margin: f64,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub out: OutArg,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.is::<commands::UsageError>() {
                2
            } else {
                1
            }
        }
    }
}
