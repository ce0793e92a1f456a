use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hydro_balance::config::{ConfigError, RunConfig};
use hydro_balance::exec::Execution;
use hydro_balance::hydro::CommitmentMode;
use hydro_balance::instances::{random_scenario_inputs, rng, InstanceShape};
use hydro_balance::io::IoError;
use hydro_balance::milp::{solve_rebalance, ScheduleError, SolveOptions};
use hydro_balance::output::{self, Artifact, OutputError};
use hydro_balance::pipeline::{self, PipelineError, ScenarioInputs};

/// Wind and hydro portfolio balancing: day-ahead scheduling, intraday
/// rebalancing and imbalance cost accounting.
#[derive(Debug, Parser)]
#[command(name = "hydrobal", version)]
struct Cli {
    /// Run configuration (TOML). Without it the bundled demo is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write every solved model in MPS format.
    #[arg(long, global = true)]
    mps_dump: bool,
    /// Use a random instance generated from this seed instead of a config.
    #[arg(long, global = true, conflicts_with = "config")]
    seed: Option<u64>,
    /// Also write a full-precision JSON dump (run only).
    #[arg(long, global = true)]
    raw: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Day-ahead schedule and plant commitment from the early forecast.
    DayAhead,
    /// Re-solve with the late inflow forecast and write raw imbalances.
    Reforecast,
    /// Synthetic intraday quotes.
    Quotes,
    /// Re-optimise against the quotes under plant or portfolio load constraints.
    Rebalance {
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Full chain and the four-scenario cost comparison.
    Run,
    /// Check config and inputs without solving.
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Plant,
    Portfolio,
}

impl From<Mode> for CommitmentMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Plant => CommitmentMode::Plant,
            Mode::Portfolio => CommitmentMode::Portfolio,
        }
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl std::fmt::Display) -> Self {
        Self {
            code,
            msg: msg.to_string(),
        }
    }
}

const VALIDATION: u8 = 2;
const INFEASIBLE: u8 = 3;
const IO: u8 = 4;

fn schedule_code(e: &ScheduleError) -> u8 {
    match e {
        ScheduleError::Invalid(_)
        | ScheduleError::MissingQuotes { .. }
        | ScheduleError::Commitment(_) => VALIDATION,
        ScheduleError::Infeasible { .. } | ScheduleError::Unbounded => INFEASIBLE,
        _ => 1,
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io(IoError::Open { .. }) => IO,
            _ => VALIDATION,
        };
        Failure::new(code, e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Invalid(_) | PipelineError::Market(_) => VALIDATION,
            PipelineError::Schedule { source, .. } => schedule_code(source),
            PipelineError::Settlement(_) => 1,
        };
        Failure::new(code, e)
    }
}

impl From<ScheduleError> for Failure {
    fn from(e: ScheduleError) -> Self {
        Failure::new(schedule_code(&e), e)
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        let code = match &e {
            OutputError::Write { .. } => IO,
            OutputError::Schedule(s) => schedule_code(s),
            _ => 1,
        };
        Failure::new(code, e)
    }
}

/// Inputs, solver options and default output directory for this invocation.
fn load(cli: &Cli) -> Result<(ScenarioInputs, SolveOptions, PathBuf), Failure> {
    if let Some(seed) = cli.seed {
        let shape = InstanceShape {
            plants: 2,
            steps: 24,
            segments: 3,
        };
        let inputs = random_scenario_inputs(&mut rng(seed), shape);
        return Ok((inputs, SolveOptions::default(), PathBuf::from("out")));
    }
    let (cfg, src, base) = match &cli.config {
        Some(path) => {
            let (cfg, src) = RunConfig::load(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (cfg, src, base)
        }
        None => {
            let (cfg, src) = RunConfig::demo();
            (cfg, src, PathBuf::new())
        }
    };
    let inputs = cfg.load_inputs(&src)?;
    let out = base.join(
        cfg.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out")),
    );
    Ok((inputs, cfg.solver, out))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let (inputs, opts, default_out) = load(cli)?;
    if let Command::Validate = cli.command {
        println!(
            "ok: {} plants, {} steps of {} min",
            inputs.system.plants.len(),
            inputs.grid.steps,
            inputs.grid.step_seconds / 60.0
        );
        return Ok(());
    }
    let out_dir = cli.out.clone().unwrap_or(default_out);
    let exec = Execution::default();

    let plan = pipeline::plan(&inputs, &opts)?;
    let mut files: Vec<Artifact> = Vec::new();
    let mut mps_keep: &[&str] = &["day_ahead"];
    let mut report = None;
    match &cli.command {
        Command::DayAhead => files.extend(output::day_ahead_artifacts(&inputs, &plan)?),
        Command::Reforecast => {
            files.extend(output::reforecast_artifacts(&inputs, &plan)?);
            mps_keep = &["day_ahead", "reforecast"];
        }
        Command::Quotes => {
            let quotes = pipeline::quotes_step(&inputs, &plan.raw)?;
            files.push(Artifact {
                name: "quotes.csv".into(),
                bytes: output::quotes_csv(&quotes)?,
            });
            files.extend(output::ladder_artifacts(&inputs, &plan)?);
            mps_keep = &["day_ahead", "reforecast"];
        }
        Command::Rebalance { mode } => {
            let mode = CommitmentMode::from(*mode);
            let quotes = pipeline::quotes_step(&inputs, &plan.raw)?;
            let p = pipeline::rebalance_problem(&inputs, &plan.commitment, &quotes, mode);
            let sol = solve_rebalance(&p, &opts)?;
            files.extend(output::rebalance_artifacts(
                &inputs, &plan, &quotes, mode, &sol, &opts,
            )?);
            mps_keep = match mode {
                CommitmentMode::Plant => &["rebalance_plant"],
                CommitmentMode::Portfolio => &["rebalance_portfolio"],
            };
        }
        Command::Run => {
            let quotes = pipeline::quotes_step(&inputs, &plan.raw)?;
            let (outcomes, comparison) =
                pipeline::run_scenarios(&inputs, &plan, &quotes, &opts, exec)?;
            let run = pipeline::PipelineRun {
                plan: plan.clone(),
                quotes,
                outcomes,
                comparison,
            };
            files.extend(output::run_artifacts(&inputs, &run, &opts, cli.raw)?);
            mps_keep = &[
                "day_ahead",
                "reforecast",
                "rebalance_plant",
                "rebalance_portfolio",
            ];
            report = Some(run.comparison.to_string());
        }
        Command::Validate => unreachable!(),
    }
    if cli.mps_dump {
        let quotes = pipeline::quotes_step(&inputs, &plan.raw)?;
        files.extend(
            output::mps_artifacts(&inputs, &plan, &quotes)?
                .into_iter()
                .filter(|a| mps_keep.iter().any(|k| a.name.split('.').next() == Some(k))),
        );
    }
    let written = output::write_artifacts(&out_dir, &files)?;
    if let Some(r) = report {
        print!("{r}");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
