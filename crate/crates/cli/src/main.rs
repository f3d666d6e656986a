mod json;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use larsdiag::diagnostics::{case_cp, simulate_cov, CovGenerator};
use larsdiag::dimension::sir;
use larsdiag::ingest::load_csv;
use larsdiag::lars::{lars_path, select_by_cp, Mode};
use larsdiag::stress::{marginal_shift_stress, run_round_stress, scale_order_audit};
use larsdiag::Error;

use json::Json;

#[derive(Parser)]
#[command(
    name = "larsdiag",
    version,
    about = "LARS regression paths with Cp diagnostics, dimension checks, and selection stress tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the LARS path and report the Cp-selected model
    Fit(FitArgs),
    /// Decompose a step's Cp into per-case terms
    Diagnose(DiagnoseArgs),
    /// Estimate the structural dimension by sliced inverse regression
    Dim(DimArgs),
    /// Rerun selection with rounded copies of the predictors added
    StressRound(StressRoundArgs),
    /// Compare selections across scale-then-expand pipelines
    StressScale(StressScaleArgs),
    /// Selection stability under a tilted-bootstrap marginal shift
    StressMarginal(StressMarginalArgs),
    /// Monte Carlo estimate of cov(mu_i, y_i)/sigma^2 at a path step
    SimulateCov(SimulateCovArgs),
}

#[derive(Args)]
struct Common {
    /// Input CSV file (header row, numeric columns)
    #[arg(long)]
    input: PathBuf,
    /// Response column name
    #[arg(long)]
    response: String,
    /// Path flavor
    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    mode: ModeArg,
    /// Master seed for any randomness
    #[arg(long, default_value_t = 20040201)]
    seed: u64,
    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Plain,
    Lasso,
}

impl From<ModeArg> for Mode {
    fn from(value: ModeArg) -> Mode {
        match value {
            ModeArg::Plain => Mode::Plain,
            ModeArg::Lasso => Mode::Lasso,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GeneratorArg {
    FixedBeta,
    FittedBeta,
}

impl From<GeneratorArg> for CovGenerator {
    fn from(value: GeneratorArg) -> CovGenerator {
        match value {
            GeneratorArg::FixedBeta => CovGenerator::FixedBeta,
            GeneratorArg::FittedBeta => CovGenerator::FittedBeta,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    /// Cap on the number of path steps
    #[arg(long)]
    max_steps: Option<usize>,
    /// Also write a long-format CSV of (step, predictor, coefficient, cp)
    #[arg(long)]
    plot_out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    common: Common,
    /// Step to decompose (default: the Cp-selected step)
    #[arg(long)]
    step: Option<usize>,
}

#[derive(Args)]
struct DimArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 10)]
    slices: usize,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Args)]
struct StressRoundArgs {
    #[command(flatten)]
    common: Common,
    /// Multiplier applied before rounding to the nearest integer
    #[arg(long, default_value_t = 2.2)]
    factor: f64,
    /// Predictors left without a rounded copy (comma separated)
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
}

#[derive(Args)]
struct StressScaleArgs {
    #[command(flatten)]
    common: Common,
    /// Predictors excluded from quadratic terms (comma separated)
    #[arg(long, value_delimiter = ',')]
    exclude: Vec<String>,
}

#[derive(Args)]
struct StressMarginalArgs {
    #[command(flatten)]
    common: Common,
    /// Predictor pair, e.g. S3,S4
    #[arg(long)]
    pair: String,
    #[arg(long)]
    target_corr: f64,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
}

#[derive(Args)]
struct SimulateCovArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = GeneratorArg::FittedBeta)]
    generator: GeneratorArg,
    #[arg(long)]
    noise_sd: f64,
    #[arg(long)]
    step_count: usize,
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let object = Json::obj(vec![(
                "error",
                Json::obj(vec![
                    ("kind", Json::Str(err.kind().to_string())),
                    ("message", Json::Str(err.to_string())),
                ]),
            )]);
            print!("{}", object.render());
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn common_config(common: &Common, command: &str) -> Vec<(&'static str, Json)> {
    vec![
        ("command", Json::Str(command.to_string())),
        (
            "format",
            Json::Str(match common.format {
                FormatArg::Json => "json".to_string(),
                FormatArg::Text => "text".to_string(),
            }),
        ),
        ("input", Json::Str(common.input.display().to_string())),
        (
            "mode",
            Json::Str(Mode::from(common.mode).as_str().to_string()),
        ),
        (
            "out",
            common
                .out
                .as_ref()
                .map(|p| Json::Str(p.display().to_string()))
                .unwrap_or(Json::Null),
        ),
        ("response", Json::Str(common.response.clone())),
        ("seed", Json::Int(common.seed as i64)),
    ]
}

fn emit(
    common: &Common,
    command: &str,
    config: Vec<(&'static str, Json)>,
    result: Json,
    text: String,
) -> Result<(), Error> {
    let output = match common.format {
        FormatArg::Json => {
            let report = Json::obj(vec![
                ("command", Json::Str(command.to_string())),
                ("config", Json::obj(config)),
                ("result", result),
                ("version", Json::Str(env!("CARGO_PKG_VERSION").to_string())),
            ]);
            report.render()
        }
        FormatArg::Text => text,
    };
    match &common.out {
        Some(path) => {
            std::fs::write(path, output).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{output}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Fit(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let path = lars_path(&dataset, args.common.mode.into(), args.max_steps)?;
            let selection = select_by_cp(&path)?;
            if let Some(plot_path) = &args.plot_out {
                let csv = report::plot_data_csv(&path);
                std::fs::write(plot_path, csv)
                    .map_err(|e| Error::Io(format!("{}: {e}", plot_path.display())))?;
            }
            let mut config = common_config(&args.common, "fit");
            config.push((
                "max_steps",
                args.max_steps
                    .map(|v| Json::Int(v as i64))
                    .unwrap_or(Json::Null),
            ));
            config.push((
                "plot_out",
                args.plot_out
                    .as_ref()
                    .map(|p| Json::Str(p.display().to_string()))
                    .unwrap_or(Json::Null),
            ));
            let text = report::path_text(&path, &selection);
            emit(
                &args.common,
                "fit",
                config,
                report::path_json(&path, &selection),
                text,
            )
        }
        Command::Diagnose(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let path = lars_path(&dataset, args.common.mode.into(), None)?;
            let selection = select_by_cp(&path)?;
            let step_index = args.step.unwrap_or(selection.chosen_step);
            let step = path.steps.get(step_index).ok_or_else(|| {
                Error::BadConfig(format!(
                    "step {step_index} out of range; path has steps 0..={}",
                    path.steps.len() - 1
                ))
            })?;
            let records = case_cp(step, &path.full_model)?;
            let mut config = common_config(&args.common, "diagnose");
            config.push(("step", Json::Int(step_index as i64)));
            let result = report::diagnose_json(step, &records, &path.full_model);
            let text = {
                let sum: f64 = records.iter().map(|r| r.c_pi).sum();
                let mut ranked: Vec<&larsdiag::diagnostics::CaseCpRecord> =
                    records.iter().collect();
                ranked.sort_by(|a, b| b.c_pi.partial_cmp(&a.c_pi).unwrap());
                let mut s = format!(
                    "per-case Cp at step {step_index} (|active| = {}): total {:.4}\n",
                    step.active_set.len(),
                    sum
                );
                s.push_str("largest contributions:\n");
                for rec in ranked.iter().take(10) {
                    s.push_str(&format!(
                        "  case {:>4}: C_pi = {:>9.4} (fit {:.4}, cov {:.4}, deficit {:.4})\n",
                        rec.case_index, rec.c_pi, rec.fit_term, rec.cov_term, rec.leverage_deficit
                    ));
                }
                s
            };
            emit(&args.common, "diagnose", config, result, text)
        }
        Command::Dim(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let result = sir(&dataset, args.slices, args.level)?;
            let mut config = common_config(&args.common, "dim");
            config.push(("level", Json::Num(args.level)));
            config.push(("slices", Json::Int(args.slices as i64)));
            let text = report::sir_text(&result);
            emit(&args.common, "dim", config, report::sir_json(&result), text)
        }
        Command::StressRound(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let report_data = run_round_stress(
                &dataset,
                args.factor,
                &args.exclude,
                args.common.mode.into(),
            )?;
            let mut config = common_config(&args.common, "stress-round");
            config.push(("exclude", json::str_list(&args.exclude)));
            config.push(("factor", Json::Num(args.factor)));
            let text = report::stress_text(&report_data);
            emit(
                &args.common,
                "stress-round",
                config,
                report::stress_json(&report_data),
                text,
            )
        }
        Command::StressScale(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let report_data = scale_order_audit(&dataset, &args.exclude, args.common.mode.into())?;
            let mut config = common_config(&args.common, "stress-scale");
            config.push(("exclude", json::str_list(&args.exclude)));
            let text = report::stress_text(&report_data);
            emit(
                &args.common,
                "stress-scale",
                config,
                report::stress_json(&report_data),
                text,
            )
        }
        Command::StressMarginal(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let (first, second) = args
                .pair
                .split_once(',')
                .ok_or_else(|| Error::BadConfig("--pair expects NAME,NAME".into()))?;
            let report_data = marginal_shift_stress(
                &dataset,
                (first.trim(), second.trim()),
                args.target_corr,
                args.replicates,
                args.common.seed,
                args.common.mode.into(),
            )?;
            let mut config = common_config(&args.common, "stress-marginal");
            config.push(("pair", Json::Str(args.pair.clone())));
            config.push(("replicates", Json::Int(args.replicates as i64)));
            config.push(("target_corr", Json::Num(args.target_corr)));
            let text = report::stability_text(&report_data);
            emit(
                &args.common,
                "stress-marginal",
                config,
                report::stability_json(&report_data),
                text,
            )
        }
        Command::SimulateCov(args) => {
            let dataset = load_csv(&args.common.input, &args.common.response)?;
            let sim = simulate_cov(
                &dataset,
                args.generator.into(),
                args.noise_sd,
                args.step_count,
                args.replicates,
                args.common.seed,
            )?;
            let mut config = common_config(&args.common, "simulate-cov");
            config.push((
                "generator",
                Json::Str(CovGenerator::from(args.generator).as_str().to_string()),
            ));
            config.push(("noise_sd", Json::Num(args.noise_sd)));
            config.push(("replicates", Json::Int(args.replicates as i64)));
            config.push(("step_count", Json::Int(args.step_count as i64)));
            let text = report::cov_simulation_text(&sim);
            emit(
                &args.common,
                "simulate-cov",
                config,
                report::cov_simulation_json(&sim),
                text,
            )
        }
    }
}
