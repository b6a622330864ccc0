//! Command-line front end: solve designs, sweep allocation ratios, report
//! optimal and budget-capped ratios, and cross-check any design with the
//! Monte Carlo simulator.

mod config;
mod report;

use armalloc_core::{
    optimizer, sim, Error as CoreError, MeanVector, QuadratureSpec, Stage, TwoStageEvent,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::ScenarioConfig;
use report::Style;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "armalloc", version, about = "Design multi-arm trials with a shared control and optimize the control:treatment allocation ratio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Single,
    TwoStage,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluationArg {
    Idealized,
    Realized,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Exact,
    Approximate,
}

#[derive(Clone, Copy, ValueEnum)]
enum HypothesisArg {
    Null,
    Lfc,
}

/// Scenario flags shared by every subcommand; they override the config
/// file, which overrides the built-in defaults.
#[derive(Args)]
struct ScenarioArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Design family.
    #[arg(long)]
    stage: Option<StageArg>,
    /// Number of active treatment arms.
    #[arg(long)]
    k: Option<u32>,
    /// Allocation ratio R (control : each active arm).
    #[arg(long)]
    r: Option<f64>,
    /// Required type I error.
    #[arg(long)]
    alpha: Option<f64>,
    /// Required power.
    #[arg(long)]
    power: Option<f64>,
    /// Outcome standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Clinically relevant effect.
    #[arg(long)]
    delta: Option<f64>,
    /// Largest uninteresting effect.
    #[arg(long)]
    delta0: Option<f64>,
    /// Ratio grid as start:end:step, e.g. 1.0:5.0:0.1.
    #[arg(long)]
    grid: Option<String>,
    /// Total-N inflation budget for R_MAX (0.03 = 3%).
    #[arg(long)]
    budget: Option<f64>,
    /// Monte Carlo replicate count.
    #[arg(long)]
    replicates: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// How achieved power treats the rounded control arm.
    #[arg(long)]
    evaluation: Option<EvaluationArg>,
    /// Two-stage integral formulation.
    #[arg(long)]
    formulation: Option<FormulationArg>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable output format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Render proportions with two decimals.
    #[arg(long)]
    paper_format: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the minimal critical value and sample size for one scenario.
    Design(ScenarioArgs),
    /// Solve every ratio on the grid and emit the comparison table.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also write a plot-ready (R, N) CSV here.
        #[arg(long)]
        plot_out: Option<PathBuf>,
    },
    /// Report the minimal-total-N allocation ratio.
    Rop(ScenarioArgs),
    /// Report the largest ratio within the inflation budget.
    Rmax {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Compare the inflation proportion exactly instead of at the
        /// two-decimal display resolution.
        #[arg(long)]
        strict_budget: bool,
    },
    /// Per-active-arm reduction table for chosen ratios (R_MAX included).
    Reduction {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated ratios to report, e.g. 2.0,3.3.
        #[arg(long, default_value = "2.0")]
        ratios: String,
    },
    /// Monte Carlo estimate of the error rate at an explicit (C, n).
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Critical value to test against.
        #[arg(long)]
        critical_value: f64,
        /// Per-arm (per-stage) sample size.
        #[arg(long)]
        n: u64,
        /// Data-generating hypothesis.
        #[arg(long, value_enum, default_value = "null")]
        hypothesis: HypothesisArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::InvalidParams { .. } => EXIT_USAGE,
            CoreError::InfeasibleDesign { .. } => EXIT_INFEASIBLE,
            CoreError::Bracket { .. }
            | CoreError::Convergence { .. }
            | CoreError::InvalidIntegrand { .. } => EXIT_CONVERGENCE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn build_config(args: &ScenarioArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = args.stage {
        cfg.stage = match v {
            StageArg::Single => Stage::Single,
            StageArg::TwoStage => Stage::TwoStage,
        };
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.r {
        cfg.r = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.power {
        cfg.power = v;
    }
    if let Some(v) = args.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.delta0 {
        cfg.delta0 = v;
    }
    if let Some(grid) = &args.grid {
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError {
                code: EXIT_USAGE,
                message: format!("invalid --grid `{grid}`: expected start:end:step"),
            });
        }
        cfg.set("grid_start", parts[0])?;
        cfg.set("grid_end", parts[1])?;
        cfg.set("grid_step", parts[2])?;
    }
    if let Some(v) = args.budget {
        cfg.budget = v;
    }
    if let Some(v) = args.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.evaluation {
        cfg.evaluation = match v {
            EvaluationArg::Idealized => armalloc_core::PowerEvaluation::IdealizedRatio,
            EvaluationArg::Realized => armalloc_core::PowerEvaluation::RealizedRatio,
        };
    }
    if let Some(v) = args.formulation {
        cfg.formulation = match v {
            FormulationArg::Exact => armalloc_core::TwoStageFormulation::Exact,
            FormulationArg::Approximate => armalloc_core::TwoStageFormulation::Approximate,
        };
    }
    Ok(cfg)
}

fn open_out(args: &ScenarioArgs) -> Result<Box<dyn Write>, CliError> {
    match &args.out {
        Some(path) => Ok(Box::new(std::fs::File::create(path)?)),
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn style(args: &ScenarioArgs) -> Style {
    Style {
        paper_format: args.paper_format,
    }
}

fn parse_ratio_tenths(list: &str) -> Result<Vec<u32>, CliError> {
    list.split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().map_err(|_| CliError {
                code: EXIT_USAGE,
                message: format!("invalid ratio `{s}` in --ratios"),
            })?;
            let t = v * 10.0;
            if (t - t.round()).abs() > 1e-9 {
                return Err(CliError {
                    code: EXIT_USAGE,
                    message: format!("ratio `{s}` is not a multiple of 0.1"),
                });
            }
            Ok(t.round() as u32)
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let quad = QuadratureSpec::default();
    match cli.command {
        Command::Design(args) => {
            let cfg = build_config(&args)?;
            let scenario = cfg.scenario()?;
            let design = scenario.solve_at(cfg.r, &quad)?;
            let mut out = open_out(&args)?;
            match args.format {
                None => report::write_design_text(&mut out, &design, &style(&args))?,
                Some(FormatArg::Csv) => report::write_design_csv(&mut out, &design, &style(&args))?,
                Some(FormatArg::Json) => {
                    serde_json::to_writer_pretty(&mut out, &report::design_json(&design))?;
                    writeln!(out)?;
                }
            }
            Ok(())
        }
        Command::Sweep { scenario: args, plot_out } => {
            let cfg = build_config(&args)?;
            let table = optimizer::sweep(&cfg.scenario()?, &cfg.grid()?, &quad)?;
            if let Some(path) = plot_out {
                let mut f = std::fs::File::create(path)?;
                report::write_plot_csv(&mut f, &table)?;
            }
            let mut out = open_out(&args)?;
            match args.format {
                Some(FormatArg::Json) => {
                    serde_json::to_writer_pretty(&mut out, &report::sweep_json(&table))?;
                    writeln!(out)?;
                }
                _ => report::write_sweep_csv(&mut out, &table, &style(&args))?,
            }
            Ok(())
        }
        Command::Rop(args) => {
            let cfg = build_config(&args)?;
            let table = optimizer::sweep(&cfg.scenario()?, &cfg.grid()?, &quad)?;
            let rep = optimizer::find_r_op(&table)?;
            let mut out = open_out(&args)?;
            match args.format {
                Some(FormatArg::Json) => {
                    serde_json::to_writer_pretty(&mut out, &report::rop_json(&rep))?;
                    writeln!(out)?;
                }
                _ => report::write_rop_text(&mut out, &rep)?,
            }
            Ok(())
        }
        Command::Rmax { scenario: args, strict_budget } => {
            let cfg = build_config(&args)?;
            let table = optimizer::sweep(&cfg.scenario()?, &cfg.grid()?, &quad)?;
            let r_max = if strict_budget {
                optimizer::find_r_max_strict(&table, cfg.budget)?
            } else {
                optimizer::find_r_max(&table, cfg.budget)?
            };
            let mut out = open_out(&args)?;
            match args.format {
                Some(FormatArg::Json) => {
                    serde_json::to_writer_pretty(
                        &mut out,
                        &serde_json::json!({ "r_max": r_max, "budget": cfg.budget }),
                    )?;
                    writeln!(out)?;
                }
                _ => writeln!(out, "R_MAX = {r_max:.1}")?,
            }
            Ok(())
        }
        Command::Reduction { scenario: args, ratios } => {
            let cfg = build_config(&args)?;
            let table = optimizer::sweep(&cfg.scenario()?, &cfg.grid()?, &quad)?;
            let mut tenths = parse_ratio_tenths(&ratios)?;
            let r_max = optimizer::find_r_max(&table, cfg.budget)?;
            let r_max_tenths = (r_max * 10.0).round() as u32;
            if !tenths.contains(&r_max_tenths) {
                tenths.push(r_max_tenths);
            }
            let rows = optimizer::per_arm_reduction_report(&table, &tenths, cfg.budget)?;
            let mut out = open_out(&args)?;
            match args.format {
                Some(FormatArg::Json) => {
                    serde_json::to_writer_pretty(&mut out, &report::reduction_json(&rows))?;
                    writeln!(out)?;
                }
                Some(FormatArg::Csv) => {
                    report::write_reduction_csv(&mut out, &rows, &style(&args))?
                }
                None => report::write_reduction_text(&mut out, &rows, &style(&args))?,
            }
            Ok(())
        }
        Command::Simulate { scenario: args, critical_value, n, hypothesis } => {
            let cfg = build_config(&args)?;
            let params = cfg.params()?;
            let means = match hypothesis {
                HypothesisArg::Null => MeanVector::null_config(params.active_arms),
                HypothesisArg::Lfc => MeanVector::lfc_config(&params),
            };
            let est = match cfg.stage {
                Stage::Single => sim::simulate_single_with_means(
                    critical_value,
                    n,
                    &params,
                    cfg.replicates,
                    cfg.seed,
                    &means,
                    matches!(hypothesis, HypothesisArg::Lfc),
                )?,
                Stage::TwoStage => sim::simulate_two_stage(
                    critical_value,
                    n,
                    &params,
                    cfg.replicates,
                    cfg.seed,
                    &means,
                    match hypothesis {
                        HypothesisArg::Null => TwoStageEvent::AnySelected,
                        HypothesisArg::Lfc => TwoStageEvent::LastArmSelected,
                    },
                )?,
            };
            let mut out = open_out(&args)?;
            match args.format {
                Some(FormatArg::Json) => {
                    serde_json::to_writer_pretty(&mut out, &est)?;
                    writeln!(out)?;
                }
                _ => report::write_sim_text(&mut out, &est)?,
            }
            Ok(())
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}
