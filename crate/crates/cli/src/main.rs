//! `splitplan`: command-line front end of the split-inference simulator.
//!
//! Every subcommand prints JSON (or a plain table for `profile`) on stdout.
//! Failures print `{"error": {"kind": ..., "message": ...}}` on stderr and
//! exit with status 2 for usage errors and 1 for everything else.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use splitplan::arch::{load_architecture, propagate, reference_architecture, CutProfile};
use splitplan::harness::{bench_scaling, run_sweep, write_tables, ExperimentConfig, Sweep, SweepParam, SweepResult};
use splitplan::oracle::{oracle_parallel, oracle_serial, GridSpec, SerialObjective};
use splitplan::{solve, P3LayerRule, Policy};

#[derive(Parser)]
#[command(name = "splitplan", version, about = "Split-inference delay simulator and allocation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment (its sweep, or a single point).
    Simulate(SimulateArgs),
    /// Run a parameter sweep over the given values.
    Sweep(SweepArgs),
    /// Print the per-cut workload and payload table of an architecture.
    Profile(ProfileArgs),
    /// Brute-force a small instance and compare with the solvers.
    Oracle(OracleArgs),
    /// Measure median solver wall time against the device count.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (JSON). Defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated policies, e.g. `p1,p2,queue-heuristic`.
    #[arg(long, value_delimiter = ',')]
    policy: Option<Vec<Policy>>,
    /// Keep reallocating breaks until one is left (instead of two).
    #[arg(long)]
    strict_breaks: bool,
    /// Cut re-selection rule of the simultaneous-arrival serial policy.
    #[arg(long, value_enum)]
    p3_layer_rule: Option<LayerRuleArg>,
    /// Outer iterations of every alternating policy.
    #[arg(long)]
    iterations: Option<usize>,
    /// Directory for the CSV and per-policy data files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerRuleArg {
    Exact,
    COnly,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values in base units (count, W, Hz, FLOP/s).
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Architecture config (JSON); the shipped reference network when absent.
    #[arg(long)]
    arch: Option<PathBuf>,
    /// Print JSON instead of a text table.
    #[arg(long)]
    json: bool,
    /// Print the architecture config itself instead of its profile.
    #[arg(long)]
    emit_arch: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMode {
    Parallel,
    SerialArrival,
    SerialQueue,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trial whose fading draws define the instance.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, value_enum, default_value = "parallel")]
    mode: OracleMode,
    /// Points per edge of the bandwidth simplex grid.
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ascending device counts.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16])]
    devices: Vec<usize>,
    /// Instances timed per device count (the median is kept).
    #[arg(long, default_value_t = 5)]
    repeats: u64,
}

/// Error reported on stderr as JSON.
struct CliError {
    kind: &'static str,
    message: String,
    usage: bool,
}

impl CliError {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        Self {
            kind,
            message: message.to_string(),
            usage: false,
        }
    }
}

impl From<splitplan::harness::HarnessError> for CliError {
    fn from(e: splitplan::harness::HarnessError) -> Self {
        use splitplan::harness::HarnessError as H;
        let kind = match &e {
            H::Config(_) => "config",
            H::Architecture { .. } => "architecture",
            H::Network(_) => "network",
            H::Io { .. } => "io",
        };
        CliError::new(kind, e)
    }
}

impl From<splitplan::SolverError> for CliError {
    fn from(e: splitplan::SolverError) -> Self {
        CliError::new("solver", e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = write!(io::stdout().lock(), "{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return report(CliError {
                kind: "usage",
                message: e
                    .to_string()
                    .lines()
                    .next()
                    .unwrap_or_default()
                    .trim_start_matches("error: ")
                    .to_string(),
                usage: true,
            })
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Profile(a) => profile(a),
        Command::Oracle(a) => oracle(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(output) => {
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = writeln!(io::stdout().lock(), "{output}");
            ExitCode::SUCCESS
        }
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("{}", json!({"error": {"kind": e.kind, "message": e.message}}));
    ExitCode::from(if e.usage { 2 } else { 1 })
}

/// Reads the config and applies command-line overrides. A relative
/// architecture path is resolved against the config file's directory.
fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        None => ExperimentConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if let Some(arch) = &config.architecture {
                if arch.is_relative() {
                    let base = path.parent().unwrap_or(Path::new("."));
                    config.architecture = Some(base.join(arch));
                }
            }
            config
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(policies) = &args.policy {
        config.policies = policies.clone();
    }
    if args.strict_breaks {
        config.solver.strict_breaks = true;
    }
    if let Some(rule) = args.p3_layer_rule {
        config.solver.p3_layer_rule = match rule {
            LayerRuleArg::Exact => P3LayerRule::Exact,
            LayerRuleArg::COnly => P3LayerRule::COnly,
        };
    }
    if let Some(n) = args.iterations {
        config.solver = config.solver.with_iterations(n);
    }
    config.validate()?;
    Ok(config)
}

fn sweep_output(result: &SweepResult, out: Option<&Path>) -> Result<String, CliError> {
    let files = match out {
        Some(dir) => write_tables(result, dir)?,
        None => Vec::new(),
    };
    let errors: Vec<Value> = result
        .errors
        .iter()
        .map(|(v, p, e)| json!({"sweep_value": v, "policy": p, "message": e}))
        .collect();
    let value = json!({
        "param": result.param,
        "points": result.points,
        "errors": errors,
        "files": files,
    });
    Ok(serde_json::to_string_pretty(&value).expect("plain data serializes"))
}

fn simulate(args: SimulateArgs) -> Result<String, CliError> {
    let config = load_config(&args.common)?;
    let result = run_sweep(&config)?;
    sweep_output(&result, args.common.out.as_deref())
}

fn sweep(args: SweepArgs) -> Result<String, CliError> {
    let mut config = load_config(&args.common)?;
    config.sweep = Some(Sweep {
        param: args.param,
        values: args.values,
    });
    config.validate()?;
    let result = run_sweep(&config)?;
    sweep_output(&result, args.common.out.as_deref())
}

fn profile(args: ProfileArgs) -> Result<String, CliError> {
    let arch = match &args.arch {
        None => reference_architecture(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
            load_architecture(&text).map_err(|e| CliError::new("architecture", format!("{}: {e}", path.display())))?
        }
    };
    if args.emit_arch {
        return Ok(arch.to_json());
    }
    let profile = propagate(&arch).map_err(|e| CliError::new("architecture", e))?;
    if args.json {
        return Ok(serde_json::to_string_pretty(&profile).expect("plain data serializes"));
    }
    Ok(profile_table(&profile))
}

fn profile_table(p: &CutProfile) -> String {
    let mut out = String::from("cut local_flops residual_flops activation_bits index_bits payload_bits\n");
    for l in p.cuts() {
        out.push_str(&format!(
            "{l} {} {} {} {} {}\n",
            p.local_workload(l),
            p.residual_workload(l),
            p.transmit_bits[l],
            p.index_bits[l],
            p.payload_bits(l)
        ));
    }
    out.push_str(&format!("# modules {} total_flops {} min_payload_cut {}", p.modules(), p.total_workload, p.min_payload_cut()));
    out
}

fn oracle(args: OracleArgs) -> Result<String, CliError> {
    let config = load_config(&args.common)?;
    let profile = config.profile()?;
    let net = config.network(&profile, args.trial)?;
    let grid = GridSpec {
        simplex_points: args.grid_points,
        ..GridSpec::default()
    };
    let (oracle, compared): (_, &[Policy]) = match args.mode {
        OracleMode::Parallel => (oracle_parallel(&net, &grid)?, &[Policy::P1]),
        OracleMode::SerialArrival => (oracle_serial(&net, &grid, SerialObjective::SimultaneousArrival)?, &[Policy::P3]),
        OracleMode::SerialQueue => (oracle_serial(&net, &grid, SerialObjective::ExactQueue)?, &[Policy::QueueHeuristic]),
    };
    let mut solvers = Vec::new();
    for &policy in compared {
        let plan = solve(policy, &net, &config.solver)?;
        solvers.push(json!({
            "policy": policy,
            "objective": plan.objective,
            "cuts": plan.cuts,
            "relative_gap": plan.objective / oracle.objective - 1.0,
        }));
    }
    let value = json!({"oracle": oracle, "solvers": solvers});
    Ok(serde_json::to_string_pretty(&value).expect("plain data serializes"))
}

fn bench(args: BenchArgs) -> Result<String, CliError> {
    let config = load_config(&args.common)?;
    let table = bench_scaling(&config, &args.devices, args.repeats)?;
    let growth: Vec<Value> = config
        .policies
        .iter()
        .map(|&p| json!({"policy": p, "growth": table.growth(p)}))
        .collect();
    let value = json!({"table": table, "growth": growth});
    Ok(serde_json::to_string_pretty(&value).expect("plain data serializes"))
}
