//! `langevin-lab`: sampling, bounds, step planning and validation from the
//! command line.
//!
//! Exit codes: 0 success, 1 runtime failure (including failed validation),
//! 2 usage error.

mod manifest;
mod validate;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use langevin_core::bounds::{theorem1_bound, theorem2_bound};
use langevin_core::planner::{figure1_curves, plan_for_epsilon, write_figure1_csv};
use langevin_core::{
    final_states, run_nlmc, BoundInputs, GradientOracle, LangevinError, LmcConfig, NoiseLaw,
    ReplicaSummary, StepGrid, TargetDescriptor,
};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use manifest::RunManifest;

const THREADS_ENV: &str = "LANGEVIN_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "langevin-lab", version, about = "Langevin Monte Carlo sampling, W2 bounds and step planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Run the sampler on a target described by a JSON file.
    Sample(SampleArgs),
    /// Evaluate a W2 bound and print it as JSON.
    Bound(BoundArgs),
    /// Choose (h, K) reaching a requested precision.
    Plan(PlanArgs),
    /// Minimal iteration counts of the two bounds as CSV.
    Figure1(Figure1Args),
    /// Check every bound against exact Gaussian laws.
    Validate(ValidateArgs),
    /// Rerun the invocation recorded in a manifest and compare digests.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Bound(_) => "bound",
            Command::Plan(_) => "plan",
            Command::Figure1(_) => "figure1",
            Command::Validate(_) => "validate",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Sample(a) => Some(a.seed),
            Command::Validate(a) => Some(a.seed),
            _ => None,
        }
    }

    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Sample(a) => a.out.as_ref(),
            Command::Bound(a) => a.out.as_ref(),
            Command::Plan(a) => a.out.as_ref(),
            Command::Figure1(a) => a.out.as_ref(),
            Command::Validate(a) => a.out.as_ref(),
            Command::Replay(_) => None,
        }
    }

    fn set_out(&mut self, path: PathBuf) {
        let slot = match self {
            Command::Sample(a) => &mut a.out,
            Command::Bound(a) => &mut a.out,
            Command::Plan(a) => &mut a.out,
            Command::Figure1(a) => &mut a.out,
            Command::Validate(a) => &mut a.out,
            Command::Replay(_) => return,
        };
        *slot = Some(path);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Exact,
    Gaussian,
    Rademacher,
    Subsampled,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Target descriptor (JSON; "quadratic" or "logistic").
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    h: f64,
    #[arg(long = "K")]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gradient-noise scale for the gaussian and rademacher oracles.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = OracleKind::Exact)]
    oracle: OracleKind,
    /// Minibatch size for the subsampled oracle.
    #[arg(long)]
    batch: Option<usize>,
    /// Independent chains; above 1 a per-coordinate summary replaces the trajectory.
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Initial point, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta0: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    #[arg(long)]
    m: f64,
    #[arg(long = "M")]
    big_m: f64,
    #[arg(long)]
    h: f64,
    #[arg(long = "K")]
    k: u64,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    w2init: f64,
    /// Gradient-noise level; selects the noisy-gradient bound when given.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PlanArgs {
    #[arg(long)]
    m: f64,
    #[arg(long = "M")]
    big_m: f64,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    w2init: f64,
    /// Target precision(s), comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    eps: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Figure1Args {
    #[arg(long, default_value_t = 4.0)]
    m: f64,
    #[arg(long = "M", default_value_t = 5.0)]
    big_m: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3", allow_negative_numbers = true)]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
    p: Vec<u64>,
    /// Step sizes searched per curve point.
    #[arg(long, default_value_t = StepGrid::DEFAULT_POINTS)]
    grid_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random targets per dimension.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Where to write the regenerated output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<LangevinError> for Failure {
    fn from(e: LangevinError) -> Self {
        use LangevinError::*;
        match e {
            InvalidParameter { name, reason } => Failure::Usage(format!("--{name}: {reason}")),
            StepOutOfRange { .. } => Failure::Usage(format!("--h: {e}")),
            DimensionMismatch { .. }
            | NotSymmetric { .. }
            | NotPositiveDefinite { .. }
            | InvalidLabel { .. }
            | NotSumStructured
            | OracleMismatch(_)
            | Descriptor(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// What a subcommand produced: the bytes to emit and whether it succeeded.
struct Output {
    bytes: Vec<u8>,
    ok: bool,
}

fn oracle_from(args: &SampleArgs) -> Result<GradientOracle, Failure> {
    if args.batch.is_some() && args.oracle != OracleKind::Subsampled {
        return Err(Failure::Usage("--batch requires --oracle subsampled".into()));
    }
    if args.sigma != 0.0 && !matches!(args.oracle, OracleKind::Gaussian | OracleKind::Rademacher) {
        return Err(Failure::Usage(
            "--sigma requires --oracle gaussian or --oracle rademacher".into(),
        ));
    }
    Ok(match args.oracle {
        OracleKind::Exact => GradientOracle::Exact,
        OracleKind::Gaussian => GradientOracle::gaussian(args.sigma),
        OracleKind::Rademacher => GradientOracle::GaussianNoise {
            sigma: args.sigma,
            law: NoiseLaw::Rademacher,
        },
        OracleKind::Subsampled => GradientOracle::Subsampled {
            batch: args
                .batch
                .ok_or_else(|| Failure::Usage("--oracle subsampled requires --batch".into()))?,
        },
    })
}

fn cmd_sample(args: &SampleArgs) -> Result<Output, Failure> {
    let target = TargetDescriptor::load(&args.target)
        .and_then(|d| d.build())
        .map_err(|e| Failure::Usage(format!("--target {}: {e}", args.target.display())))?;
    let theta0 = match &args.theta0 {
        Some(v) if v.len() != target.dim() => {
            return Err(Failure::Usage(format!(
                "--theta0 has {} entries, target dimension is {}",
                v.len(),
                target.dim()
            )))
        }
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::zeros(target.dim()),
    };
    if args.replicas == 0 {
        return Err(Failure::Usage("--replicas must be at least 1".into()));
    }
    let config = LmcConfig::new(args.h, args.k, args.seed).with_oracle(oracle_from(args)?);
    let mut bytes = Vec::new();
    if args.replicas == 1 {
        run_nlmc(&target, &config, theta0)?.write_csv(&mut bytes)?;
    } else {
        let states = final_states(&target, &config, theta0, args.replicas)?;
        let s = ReplicaSummary::from_states(&states)?;
        writeln!(bytes, "coordinate,replicas,mean,variance,mean_std_error,variance_std_error")?;
        for j in 0..s.mean.len() {
            writeln!(
                bytes,
                "{j},{},{:e},{:e},{:e},{:e}",
                s.replicas, s.mean[j], s.variance[j], s.mean_std_error[j], s.variance_std_error[j]
            )?;
        }
    }
    Ok(Output { bytes, ok: true })
}

fn json_line(value: &impl Serialize) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn cmd_bound(args: &BoundArgs) -> Result<Output, Failure> {
    let inputs = BoundInputs::new(args.m, args.big_m, args.h, args.k, args.p, args.w2init);
    let report = match args.sigma {
        None => theorem1_bound(&inputs)?,
        Some(sigma) => theorem2_bound(&inputs.with_sigma(sigma))?,
    };
    Ok(Output {
        bytes: json_line(&report)?,
        ok: true,
    })
}

fn cmd_plan(args: &PlanArgs) -> Result<Output, Failure> {
    let plans = args
        .eps
        .iter()
        .map(|&eps| plan_for_epsilon(args.m, args.big_m, args.p, args.w2init, eps))
        .collect::<Result<Vec<_>, _>>()?;
    let bytes = match plans.as_slice() {
        [single] => json_line(single)?,
        many => json_line(&many)?,
    };
    Ok(Output { bytes, ok: true })
}

fn cmd_figure1(args: &Figure1Args) -> Result<Output, Failure> {
    if let Some(eps) = args.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Failure::Usage(format!("--eps: must be positive, got {eps}")));
    }
    let curves = figure1_curves(args.m, args.big_m, &args.eps, &args.p, args.grid_size)?;
    let mut bytes = Vec::new();
    write_figure1_csv(&curves, &mut bytes)?;
    Ok(Output { bytes, ok: true })
}

fn cmd_validate(args: &ValidateArgs) -> Result<Output, Failure> {
    if args.instances == 0 {
        return Err(Failure::Usage("--instances must be at least 1".into()));
    }
    let report = validate::run(args.seed, args.instances)?;
    if let Some(cex) = &report.first_counterexample {
        eprintln!("validation failed ({} of {} cells): {cex}", report.failures, report.cells);
    }
    Ok(Output {
        bytes: json_line(&report)?,
        ok: report.failures == 0,
    })
}

fn execute(command: &Command) -> Result<Output, Failure> {
    match command {
        Command::Sample(a) => cmd_sample(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Figure1(a) => cmd_figure1(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Replay(a) => replay(a),
    }
}

/// Runs `command`, then writes its output (and manifest) or prints it.
fn run_and_emit(command: &Command) -> Result<bool, Failure> {
    let start = Instant::now();
    let output = execute(command)?;
    let wall = start.elapsed();
    match command.out() {
        Some(path) => {
            fs::write(path, &output.bytes)?;
            RunManifest::new(command, wall, path, &output.bytes).write()?;
        }
        None => std::io::stdout().write_all(&output.bytes)?,
    }
    Ok(output.ok)
}

fn replay(args: &ReplayArgs) -> Result<Output, Failure> {
    let recorded = RunManifest::load(&args.manifest)
        .map_err(|e| Failure::Usage(format!("--manifest {}: {e}", args.manifest.display())))?;
    let mut command = recorded.parameters.clone();
    if matches!(command, Command::Replay(_)) {
        return Err(Failure::Usage("--manifest records a replay".into()));
    }
    if recorded.version != env!("CARGO_PKG_VERSION") {
        log::warn!(
            "manifest written by version {}, running {}",
            recorded.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    command.set_out(args.out.clone());
    run_and_emit(&command)?;
    let digest = manifest::sha256_hex(&fs::read(&args.out)?);
    let matches = digest == recorded.sha256;
    let mut line = String::new();
    let _ = write!(
        line,
        "{{\"reproduced\":{matches},\"expected\":\"{}\",\"actual\":\"{digest}\"}}",
        recorded.sha256
    );
    line.push('\n');
    Ok(Output {
        bytes: line.into_bytes(),
        ok: matches,
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on parse errors.
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run_and_emit(&cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
