//! Command-line surface: simulate / assess / stack-assess / montecarlo / report.
//!
//! Exit codes: 0 success, 2 input error (bad flags, unreadable or malformed
//! data), 3 numerical failure. Worker-pool size follows the
//! `RAYON_NUM_THREADS` environment variable; all randomness is derived from
//! the `--seed` flags, so re-running a command with the same configuration
//! produces byte-identical reports.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seqcv::cv::{CvLoops, SelectionRule};
use seqcv::dataio::{self, DatasetFiles};
use seqcv::harness::{self, StrategyLabel};
use seqcv::permtest::{self, PermutationOptions};
use seqcv::report::{self, AssessReport, InputSummary, MonteCarloReport, RunConfig, SourceOrder, StackReport};
use seqcv::seqassess;
use seqcv::simgen::{self, ScenarioName, ScenarioSpec};
use seqcv::Error;

#[derive(Parser)]
#[command(
    name = "seqcv",
    about = "Sequential double cross-validation assessment of added predictive ability",
    long_about = "Two-block penalized prediction: cross-validate a primary predictor block, \
                  cross-validate its deletion residuals on a secondary block, summarize with \
                  Q² measures, and test the added predictive value by permutation.\n\
                  Set RAYON_NUM_THREADS to control the worker pool.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LoopsArg {
    Double,
    Single,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Opt,
    #[value(name = "one-se", alias = "1se")]
    OneSe,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Flags shared by every command that runs cross-validation.
#[derive(Args)]
struct CvArgs {
    /// Penalty mix for stage 1: 0 = ridge, 1 = lasso.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Penalty mix for stage 2 (defaults to --alpha).
    #[arg(long)]
    alpha2: Option<f64>,
    /// Cross-validation loops: double (out-of-fold) or single (in-sample).
    #[arg(long, value_enum, default_value = "double")]
    strategy: LoopsArg,
    /// Penalty selection rule in the inner loop.
    #[arg(long, value_enum, default_value = "opt")]
    rule: RuleArg,
    /// Outer folds.
    #[arg(long = "J", default_value_t = 5)]
    j: usize,
    /// Inner folds.
    #[arg(long = "K", default_value_t = 5)]
    k: usize,
    /// Penalty grid length.
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    /// Grid depth lambda_min/lambda_max; defaults to a shape-adaptive value.
    #[arg(long)]
    eps_ratio: Option<f64>,
}

/// Flags naming the three dataset files.
#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    x1: PathBuf,
    #[arg(long)]
    x2: PathBuf,
    #[arg(long)]
    y: PathBuf,
    /// Natural-log transform of the response on load.
    #[arg(long)]
    log_y: bool,
}

/// Same as DataArgs but optional, for `assess --replay`.
#[derive(Args)]
struct DataArgsOpt {
    #[arg(long)]
    x1: Option<PathBuf>,
    #[arg(long)]
    x2: Option<PathBuf>,
    #[arg(long)]
    y: Option<PathBuf>,
    /// Natural-log transform of the response on load.
    #[arg(long)]
    log_y: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-source dataset and write it as CSV.
    Simulate {
        /// Scenario name: 1a, 1b, 1c, 1d, 2a, 2b, 2c.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        p: usize,
        #[arg(long, default_value_t = 100)]
        q: usize,
        /// Outcome noise standard deviation (defaults to the calibrated preset).
        #[arg(long)]
        noise_sd: Option<f64>,
        #[arg(long)]
        seed: u64,
        /// Output directory for x1.csv, x2.csv, y.csv, truth.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the two-stage sequential assessment on CSV data.
    Assess {
        #[command(flatten)]
        data: DataArgsOpt,
        #[command(flatten)]
        cv: CvArgs,
        /// Permutation count for the added-value test (0 skips the test).
        #[arg(long, default_value_t = 0)]
        perms: usize,
        /// Smoothed (1+#)/(1+M) p-value instead of the plain proportion.
        #[arg(long)]
        smoothed: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Treat the second block as primary (mirrors reversing the source roles).
        #[arg(long)]
        swap_sources: bool,
        /// Re-run the configuration embedded in an existing report.
        #[arg(long, conflicts_with_all = ["swap_sources", "smoothed"])]
        replay: Option<PathBuf>,
        /// Report path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate a single model on the column-wise stack of both blocks.
    StackAssess {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        cv: CvArgs,
        /// Standardize every column over the full sample before stacking.
        #[arg(long)]
        scale: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo trials of a scenario under one or more strategies.
    Montecarlo {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        p: usize,
        #[arg(long, default_value_t = 100)]
        q: usize,
        #[arg(long)]
        noise_sd: Option<f64>,
        /// Penalty mix for both stages.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Strategy labels (repeatable): cvd_opt, cvd_1se, cvs_opt.
        #[arg(long = "label", default_values_t = [String::from("cvd_opt")])]
        labels: Vec<String>,
        #[arg(long = "J", default_value_t = 5)]
        j: usize,
        #[arg(long = "K", default_value_t = 5)]
        k: usize,
        /// Monte Carlo trials per cell (desk scale default).
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Permutations per trial (0 skips the test).
        #[arg(long, default_value_t = 100)]
        perms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the aggregate rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-render a saved Monte Carlo report as CSV or JSON.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_assess_config(config: RunConfig, files: DatasetFiles, out: &Option<PathBuf>) -> Result<(), Error> {
    let data = dataio::load_dataset(&files)?;
    let (primary, secondary) = match config.source_order {
        SourceOrder::X1First => (data.x1.view(), data.x2.view()),
        SourceOrder::X2First => (data.x2.view(), data.x1.view()),
    };
    let seq_cfg = config.sequential();
    let result = seqassess::sequential_assess(primary, secondary, data.y.view(), &seq_cfg)?;
    let perm = if config.permutations > 0 {
        Some(permtest::permutation_test(
            primary,
            secondary,
            data.y.view(),
            &seq_cfg,
            config.permutations,
            config.seed,
            PermutationOptions {
                smoothed: config.smoothed_p_value,
            },
        )?)
    } else {
        None
    };
    let inputs = InputSummary {
        x1_path: files.x1.clone(),
        x2_path: files.x2.clone(),
        y_path: files.y.clone(),
        n: data.y.len(),
        p: data.x1.ncols(),
        q: data.x2.ncols(),
    };
    let rep = AssessReport::new(config, inputs, &result, perm.as_ref());
    let text = report::to_json_string(&rep)?;
    emit(out, &text)?;
    eprintln!(
        "q2_primary = {:.4}, q2_conditional = {}, q2_joint = {:.4}{}",
        rep.q2_primary,
        rep.q2_conditional
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "undefined (degenerate residual)".into()),
        rep.q2_joint,
        rep.p_value
            .map(|p| format!(", p = {p:.4}"))
            .unwrap_or_default()
    );
    Ok(())
}

fn to_loops(v: LoopsArg) -> CvLoops {
    match v {
        LoopsArg::Double => CvLoops::Double,
        LoopsArg::Single => CvLoops::Single,
    }
}

fn to_rule(v: RuleArg) -> SelectionRule {
    match v {
        RuleArg::Opt => SelectionRule::Opt,
        RuleArg::OneSe => SelectionRule::OneSe,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            scenario,
            n,
            p,
            q,
            noise_sd,
            seed,
            out,
        } => {
            let name = ScenarioName::from_str(&scenario)?;
            let mut spec = ScenarioSpec::preset(name, n, p, q);
            if let Some(sd) = noise_sd {
                spec.noise_sd = sd;
            }
            let ds = simgen::build_scenario(&spec, seed)?;
            let files = dataio::export_dataset(&ds, &out)?;
            #[derive(serde::Serialize)]
            struct TruthOut<'a> {
                spec_version: u32,
                scenario: &'a ScenarioSpec,
                seed: u64,
                beta1: Vec<f64>,
                beta2: Vec<f64>,
            }
            report::write_json(
                &out.join("truth.json"),
                &TruthOut {
                    spec_version: report::SPEC_VERSION,
                    scenario: &spec,
                    seed,
                    beta1: ds.truth.beta1.to_vec(),
                    beta2: ds.truth.beta2.to_vec(),
                },
            )?;
            eprintln!(
                "wrote {}, {}, {} (n = {n}, p = {p}, q = {q})",
                files.x1.display(),
                files.x2.display(),
                files.y.display()
            );
            Ok(())
        }
        Command::Assess {
            data,
            cv,
            perms,
            smoothed,
            seed,
            swap_sources,
            replay,
            out,
        } => {
            if let Some(path) = replay {
                let prev: AssessReport = report::read_json(&path)?;
                let files = DatasetFiles {
                    x1: prev.inputs.x1_path.clone(),
                    x2: prev.inputs.x2_path.clone(),
                    y: prev.inputs.y_path.clone(),
                    log_y: prev.config.log_y,
                };
                return run_assess_config(prev.config, files, &out);
            }
            let (x1, x2, y) = match (data.x1, data.x2, data.y) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(Error::Input("--x1, --x2 and --y are required without --replay".into())),
            };
            let config = RunConfig {
                alpha1: cv.alpha,
                alpha2: cv.alpha2.unwrap_or(cv.alpha),
                loops: to_loops(cv.strategy),
                rule: to_rule(cv.rule),
                outer_folds: cv.j,
                inner_folds: cv.k,
                n_lambda: cv.n_lambda,
                eps_ratio: cv.eps_ratio,
                permutations: perms,
                smoothed_p_value: smoothed,
                seed,
                source_order: if swap_sources {
                    SourceOrder::X2First
                } else {
                    SourceOrder::X1First
                },
                log_y: data.log_y,
                scale: false,
            };
            let files = DatasetFiles {
                x1,
                x2,
                y,
                log_y: data.log_y,
            };
            run_assess_config(config, files, &out)
        }
        Command::StackAssess {
            data,
            cv,
            scale,
            seed,
            out,
        } => {
            let files = DatasetFiles {
                x1: data.x1,
                x2: data.x2,
                y: data.y,
                log_y: data.log_y,
            };
            let loaded = dataio::load_dataset(&files)?;
            let config = RunConfig {
                alpha1: cv.alpha,
                alpha2: cv.alpha2.unwrap_or(cv.alpha),
                loops: to_loops(cv.strategy),
                rule: to_rule(cv.rule),
                outer_folds: cv.j,
                inner_folds: cv.k,
                n_lambda: cv.n_lambda,
                eps_ratio: cv.eps_ratio,
                permutations: 0,
                smoothed_p_value: false,
                seed,
                source_order: SourceOrder::X1First,
                log_y: files.log_y,
                scale,
            };
            let res = seqassess::stack_assess(
                loaded.x1.view(),
                loaded.x2.view(),
                loaded.y.view(),
                scale,
                config.alpha1,
                &config.strategy(),
                seed,
            )?;
            let rep = StackReport {
                spec_version: report::SPEC_VERSION,
                inputs: InputSummary {
                    x1_path: files.x1.clone(),
                    x2_path: files.x2.clone(),
                    y_path: files.y.clone(),
                    n: loaded.y.len(),
                    p: loaded.x1.ncols(),
                    q: loaded.x2.ncols(),
                },
                config,
                q2_stacked: res.q2,
                chosen_lambdas: res.prediction.chosen_lambdas.clone(),
                fold_assignments: res.prediction.plan.assignments.clone(),
            };
            let text = report::to_json_string(&rep)?;
            emit(&out, &text)?;
            eprintln!("q2_stacked = {:.4} (scale = {scale})", res.q2);
            Ok(())
        }
        Command::Montecarlo {
            scenario,
            n,
            p,
            q,
            noise_sd,
            alpha,
            labels,
            j,
            k,
            trials,
            perms,
            seed,
            out,
            csv,
        } => {
            let name = ScenarioName::from_str(&scenario)?;
            let mut spec = ScenarioSpec::preset(name, n, p, q);
            if let Some(sd) = noise_sd {
                spec.noise_sd = sd;
            }
            let strategies: Vec<StrategyLabel> = labels
                .iter()
                .map(|s| StrategyLabel::from_str(s))
                .collect::<Result<_, _>>()?;
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            for &label in &strategies {
                let batch = harness::run_trials(&spec, alpha, alpha, label, j, k, trials, perms, seed)?;
                rows.push(harness::aggregate(&batch)?);
                failures.extend(batch.failures);
            }
            let rep = MonteCarloReport {
                spec_version: report::SPEC_VERSION,
                scenario: name.to_string(),
                n,
                p,
                q,
                noise_sd: spec.noise_sd,
                alpha,
                outer_folds: j,
                inner_folds: k,
                trials,
                permutations: perms,
                seed,
                strategies,
                rows,
                failures,
            };
            if let Some(path) = &csv {
                std::fs::write(path, harness::rows_to_csv(&rep.rows)?).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
            }
            let text = report::to_json_string(&rep)?;
            emit(&out, &text)?;
            for row in &rep.rows {
                eprintln!(
                    "{} {}: q2_x1 = {:.3} ({:.3}), q2_cond = {:.3} ({:.3}), q2_joint = {:.3} ({:.3}){}",
                    row.scenario,
                    row.strategy,
                    row.mean_q2_x1,
                    row.sd_q2_x1,
                    row.mean_q2_cond,
                    row.sd_q2_cond,
                    row.mean_q2_joint,
                    row.sd_q2_joint,
                    row.rejection_rate
                        .map(|r| format!(", rejection = {r:.3}"))
                        .unwrap_or_default()
                );
            }
            Ok(())
        }
        Command::Report { input, format, out } => {
            let rep: MonteCarloReport = report::read_json(&input)?;
            let text = match format {
                FormatArg::Json => report::to_json_string(&rep)?,
                FormatArg::Csv => harness::rows_to_csv(&rep.rows)?,
            };
            emit(&out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
