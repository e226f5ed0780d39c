use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lbfl_core::bench::{bench, render_table, BenchOptions};
use lbfl_core::cfl::LocalSearchConfig;
use lbfl_core::generate::{generate_instance, Profile};
use lbfl_core::io::{instance_to_json, load_instance, load_solution, SolutionFile};
use lbfl_core::oracle::brute_lbfl;
use lbfl_core::pipeline::check_solution;
use lbfl_core::{
    pipeline_solve, CostBreakdown, Error, LbflInstance, PipelineConfig, Rational, Result,
};

#[derive(Debug, Parser)]
#[command(
    name = "lbfl",
    version,
    about = "Lower-bounded facility location solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, clap::Args)]
struct SolverArgs {
    /// Coverage parameter in (1/2, 1), as a fraction.
    #[arg(long, default_value = "2/3")]
    beta: Rational,
    /// Relative improvement threshold for the capacitated local search.
    #[arg(long, default_value = "1/100")]
    cfl_eps: Rational,
    /// Cap on accepted local-search moves; hitting it is reported as a warning.
    #[arg(long, default_value_t = 10_000)]
    cfl_max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            beta: self.beta,
            cfl: LocalSearchConfig {
                eps: self.cfl_eps,
                max_iters: self.cfl_max_iters,
            },
            ..PipelineConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// tiny, micro, clustered or small.
        #[arg(long, default_value = "tiny")]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance through the reduction pipeline.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write every derived instance and certificate to this file.
        #[arg(long)]
        emit_stages: Option<PathBuf>,
        /// Write the solution file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance exactly by enumeration.
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate and cost a solution file.
    Check {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Run the pipeline over a range of seeds.
    Bench {
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: u64,
        #[arg(long, default_value = "tiny")]
        profile: String,
        #[command(flatten)]
        solver: SolverArgs,
        /// Skip the exact optimum.
        #[arg(long)]
        no_oracle: bool,
        /// Record wall-clock timings (makes the report nondeterministic).
        #[arg(long)]
        timings: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn profile(name: &str) -> Result<Profile> {
    Profile::named(name).ok_or_else(|| Error::malformed(format!("unknown profile {name:?}")))
}

fn cost_json(inst: &LbflInstance, c: &CostBreakdown) -> serde_json::Value {
    json!({
        "facility": c.facility,
        "connection": c.connection,
        "total": c.total,
        "scale": inst.scale,
        "total_unscaled": inst.unscaled(c.total),
    })
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializes")
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen {
            seed,
            profile: name,
            out,
        } => {
            let inst = generate_instance(seed, &profile(&name)?)?;
            emit(out.as_deref(), &instance_to_json(&inst))?;
        }
        Command::Solve {
            instance,
            solver,
            emit_stages,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let config = PipelineConfig {
                emit_stages: emit_stages.is_some(),
                ..solver.config()
            };
            let result = pipeline_solve(&inst, &config)?;
            for w in &result.report.warnings {
                eprintln!("warning: {w}");
            }
            let file = SolutionFile::from_solution(&inst, &result.solution);
            if let (Some(path), Some(stages)) = (emit_stages.as_deref(), &result.stages) {
                write_file(
                    path,
                    &pretty(&json!({ "stages": stages, "report": result.report })),
                )?;
            }
            if let Some(path) = out.as_deref() {
                write_file(path, &pretty(&file))?;
            }
            println!(
                "{}",
                pretty(&json!({
                    "solution": file,
                    "cost": cost_json(&inst, &result.cost),
                    "report": result.report,
                }))
            );
        }
        Command::Oracle { instance, out } => {
            let inst = load_instance(&instance)?;
            let (sol, _) = brute_lbfl(&inst)?;
            let cost = lbfl_core::cost_of(&inst, &sol)?.cost;
            let file = SolutionFile::from_solution(&inst, &sol);
            if let Some(path) = out.as_deref() {
                write_file(path, &pretty(&file))?;
            }
            println!(
                "{}",
                pretty(&json!({ "solution": file, "cost": cost_json(&inst, &cost) }))
            );
        }
        Command::Check { instance, solution } => {
            let inst = load_instance(&instance)?;
            let verdict = check_solution(&inst, &load_solution(&solution)?)?;
            println!(
                "{}",
                pretty(&json!({
                    "feasible": verdict.feasible,
                    "cost": verdict.cost.map(|c| cost_json(&inst, &c)),
                    "problems": verdict.problems,
                }))
            );
            if !verdict.feasible {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench {
            seed,
            count,
            profile: name,
            solver,
            no_oracle,
            timings,
            format,
            out,
        } => {
            let end = seed
                .checked_add(count)
                .ok_or_else(|| Error::malformed("seed range overflows"))?;
            let options = BenchOptions {
                oracle: !no_oracle,
                timings,
            };
            let report = bench(seed..end, &profile(&name)?, &solver.config(), options)?;
            let text = match format {
                Format::Json => pretty(&report),
                Format::Table => render_table(&report),
            };
            emit(out.as_deref(), text.trim_end())?;
            if !report.summary.all_checks_passed || report.summary.failed > 0 {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
