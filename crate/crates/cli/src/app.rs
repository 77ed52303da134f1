//! Argument parsing and subcommand dispatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qdiscord::correlation::balance_report;
use qdiscord::optimizer::{discord, discord_all_expressions};
use qdiscord::{DensityOperator, Expression, KrausInstrument, MeasurementFamily, OptimizerConfig};
use serde::Serialize;

use crate::families::{parse_param, Family, StateFamilySpec};
use crate::sweep::{run_sweep, write_csv, SweepSpec};
use crate::verify::{run_verification, SuiteSelection};
use crate::{to_json, CliError, EXIT_IDENTITY_FAILURE, EXIT_NON_CONVERGENCE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "qdiscord", version, about = "Quantum discord from measurement-induced disturbance")]
pub struct Cli {
    /// Seed for state families, verification trials and optimizer restarts.
    #[arg(long, global = true, env = "DISCORD_DEFAULT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize one or all discord expressions for a state.
    Compute(ComputeArgs),
    /// Run randomized identity suites and print a JSON report.
    Verify(VerifyArgs),
    /// Sweep one family parameter and write a CSV table.
    Sweep(SweepArgs),
    /// Write a family state as JSON.
    Generate(GenerateArgs),
    /// Evaluate every quantity and identity residual for a fixed instrument.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct StateSource {
    /// State JSON file.
    #[arg(long, conflicts_with = "family")]
    pub state: Option<PathBuf>,
    /// State family: werner, bell_diagonal, isotropic, classical_quantum, random.
    #[arg(long)]
    pub family: Option<Family>,
    /// Family parameter as name=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 16)]
    pub grid_theta: usize,
    #[arg(long, default_value_t = 32)]
    pub grid_phi: usize,
    #[arg(long, default_value_t = 500)]
    pub refine_iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// projective_qubit, projective_general or rank1_povm_<n>.
    #[arg(long, default_value = "projective_qubit", value_parser = parse_measurement_family)]
    pub measurements: MeasurementFamily,
}

fn parse_measurement_family(s: &str) -> Result<MeasurementFamily, String> {
    s.parse().map_err(|e: qdiscord::Error| e.to_string())
}

impl OptimizerArgs {
    fn config(&self, seed: u64) -> Result<OptimizerConfig, CliError> {
        let config = OptimizerConfig {
            grid_theta: self.grid_theta,
            grid_phi: self.grid_phi,
            refine_iters: self.refine_iters,
            refine_tol: self.refine_tol,
            restarts: self.restarts,
            seed,
            family: self.measurements,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: StateSource,
    /// Label of the measured subsystem; defaults to the last factor.
    #[arg(long)]
    pub measured: Option<String>,
    /// cond_entropy, disturbance_gap, gain_gap, relent_gap or all.
    #[arg(long, default_value = "cond_entropy")]
    pub expression: String,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// tradeoff, gaps, rank1, good, projective_chain or all.
    #[arg(long, default_value = "all")]
    pub suite: SuiteSelection,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Also write the report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: Family,
    /// Fixed family parameters as name=value.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Parameter to sweep.
    #[arg(long)]
    pub vary: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub step: f64,
    /// Add the brute-force oracle at this resolution.
    #[arg(long, num_args = 0..=1, default_missing_value = "128")]
    pub oracle: Option<usize>,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub source: StateSource,
    /// Instrument JSON file.
    #[arg(long)]
    pub instrument: PathBuf,
    #[arg(long)]
    pub measured: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Source {
    File { path: String },
    Family(StateFamilySpec),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_state(src: &StateSource, seed: u64) -> Result<(DensityOperator, Source), CliError> {
    match (&src.state, src.family) {
        (Some(path), _) => {
            if !src.params.is_empty() {
                return Err(CliError::Input("--param needs --family".into()));
            }
            let rho = DensityOperator::from_json_str(&read(path)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok((rho, Source::File { path: path.display().to_string() }))
        }
        (None, Some(family)) => {
            let spec = StateFamilySpec::new(family, src.params.iter().cloned(), seed)?;
            Ok((spec.build()?, Source::Family(spec)))
        }
        (None, None) => Err(CliError::Input("either --state or --family is required".into())),
    }
}

fn measured_label(rho: &DensityOperator, given: &Option<String>) -> Result<String, CliError> {
    match given {
        Some(l) if rho.layout().contains(l) => Ok(l.clone()),
        Some(l) => Err(CliError::Input(format!("state has no subsystem `{l}`"))),
        None => {
            let labels: Vec<&str> = rho.layout().labels().collect();
            if labels.len() < 2 {
                return Err(CliError::Input("state needs at least two subsystems".into()));
            }
            Ok(labels[labels.len() - 1].to_string())
        }
    }
}

#[derive(Serialize)]
struct ComputeOutput<'a> {
    source: Source,
    measured: &'a str,
    expression: &'a str,
    optimizer: &'a OptimizerConfig,
    result: qdiscord::DiscordResult,
}

fn compute(args: &ComputeArgs, seed: u64, out: &mut dyn Write) -> Result<u8, CliError> {
    let (rho, source) = load_state(&args.source, seed)?;
    let measured = measured_label(&rho, &args.measured)?;
    let config = args.optimizer.config(seed)?;
    let result = if args.expression == "all" {
        discord_all_expressions(&rho, &measured, &config)?
    } else {
        let expr: Expression = args.expression.parse().map_err(|e: qdiscord::Error| CliError::Input(e.to_string()))?;
        discord(&rho, &measured, &config, expr)?
    };
    let converged = result.converged;
    let report =
        ComputeOutput { source, measured: &measured, expression: &args.expression, optimizer: &config, result };
    writeln!(out, "{}", to_json(&report)?).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(if converged { EXIT_OK } else { EXIT_NON_CONVERGENCE })
}

fn verify(args: &VerifyArgs, seed: u64, out: &mut dyn Write) -> Result<u8, CliError> {
    let config = args.optimizer.config(seed)?;
    let start = Instant::now();
    let mut report = run_verification(args.suite, args.trials, seed, &config)?;
    let elapsed = start.elapsed().as_secs_f64();
    if args.timing {
        report.wall_clock_seconds = Some(elapsed);
    }
    let text = to_json(&report)?;
    if let Some(path) = &args.output {
        write_file(path, format!("{text}\n").as_bytes())?;
    }
    writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
    Ok(if report.pass { EXIT_OK } else { EXIT_IDENTITY_FAILURE })
}

fn sweep(args: &SweepArgs, seed: u64) -> Result<u8, CliError> {
    let spec = SweepSpec {
        base: StateFamilySpec::new(args.family, args.params.iter().cloned(), seed)?,
        vary: args.vary.clone(),
        from: args.from,
        to: args.to,
        step: args.step,
        oracle: args.oracle,
    };
    let config = args.optimizer.config(seed)?;
    // Fail on an unwritable destination before doing any work.
    let file = fs::File::create(&args.output).map_err(|e| CliError::Io(format!("{}: {e}", args.output.display())))?;
    let rows = run_sweep(&spec, &config)?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    Ok(if rows.iter().all(|r| r.converged) { EXIT_OK } else { EXIT_NON_CONVERGENCE })
}

fn generate(args: &GenerateArgs, seed: u64, out: &mut dyn Write) -> Result<u8, CliError> {
    let rho = StateFamilySpec::new(args.family, args.params.iter().cloned(), seed)?.build()?;
    let text = rho.to_json_string();
    match &args.output {
        Some(path) => write_file(path, format!("{text}\n").as_bytes())?,
        None => writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(EXIT_OK)
}

fn report(args: &ReportArgs, seed: u64, out: &mut dyn Write) -> Result<u8, CliError> {
    let (rho, _) = load_state(&args.source, seed)?;
    let measured = measured_label(&rho, &args.measured)?;
    let inst = KrausInstrument::from_json_str(&read(&args.instrument)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.instrument.display())))?;
    let report = balance_report(&rho, &measured, &inst)?;
    writeln!(out, "{}", to_json(&report)?).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(if report.holds() { EXIT_OK } else { EXIT_IDENTITY_FAILURE })
}

/// Runs a parsed command, writing the primary output to `out`. Returns the
/// process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Compute(a) => compute(a, cli.seed, out),
        Command::Verify(a) => verify(a, cli.seed, out),
        Command::Sweep(a) => sweep(a, cli.seed),
        Command::Generate(a) => generate(a, cli.seed, out),
        Command::Report(a) => report(a, cli.seed, out),
    }
}
