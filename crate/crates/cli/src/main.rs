//! `tsvf` — exact reports for pre- and post-selected quantum scenarios.
//!
//! Every subcommand loads a scenario (a built-in name or a JSON file), runs
//! one analysis, and prints a report to stdout as text or JSON. Randomness is
//! never implicit: `weak-mc` requires an explicit `--seed`, and rerunning a
//! command with the same arguments reproduces the output byte for byte.
//!
//! Exit codes: `0` success, `1` usage errors (bad flags, unknown scenario),
//! `2` invalid scenarios, observables, or configuration, `3` post-selection
//! that cannot be reached (an impossible forced outcome, or a post-selected
//! state orthogonal to everything the analysis conditions on).

mod report;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt;
use std::path::Path;
use std::process::ExitCode;
use tsvf_core::hilbert::DEFAULT_EPS;
use tsvf_core::tsvf::DEFAULT_CERTAINTY_TOLERANCE;
use tsvf_core::weak::WeakMeasurementConfig;
use tsvf_core::{frames, scenarios, tsvf, weak, Error, Ordering, Scenario};

use report::{
    abl_rows, comparison_body, eor_row, rules_body, single_run_body, weak_mc_body, AblBody,
    BuiltinSummary, EorBody, ExactPointer, ListBody, RenderText, Report, WeakBody, TOOL, VERSION,
};

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "tsvf", version, about = "Exact analysis of pre- and post-selected quantum systems", max_term_width = 100)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Replay collapse trajectories. With --ordering, replay that single
    /// frame; otherwise compare the scenario's stored orderings (defaulting
    /// to the listed event order and its reverse).
    Run {
        /// Built-in scenario name, or path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
        /// Comma-separated event ids, e.g. "A,C".
        #[arg(long)]
        ordering: Option<String>,
    },
    /// Conditional probabilities of one observable's outcomes between the
    /// scenario's pre- and post-selection.
    Abl {
        #[arg(long)]
        scenario: String,
        /// Compact spec like "z1", "x2", "z1z2", or a built-in event id.
        #[arg(long)]
        observable: String,
    },
    /// The certain outcome of an observable between the selections, if any.
    Eor {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        observable: String,
        /// Treat probabilities >= 1 - tolerance as certain.
        #[arg(long, default_value_t = DEFAULT_CERTAINTY_TOLERANCE)]
        tolerance: f64,
    },
    /// Check whether separately certain outcomes of two observables combine:
    /// is the pair jointly certain, and is their product certain?
    CheckRules {
        #[arg(long)]
        scenario: String,
        /// First observable spec.
        #[arg(long)]
        a: String,
        /// Second observable spec.
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = DEFAULT_CERTAINTY_TOLERANCE)]
        tolerance: f64,
    },
    /// The weak value of an operator between the selections.
    Weak {
        #[arg(long)]
        scenario: String,
        /// Operator spec like "z1", "x2", "z1z2".
        #[arg(long)]
        operator: String,
        /// Also report the exact pointer-model statistics (no sampling) at
        /// the coupling below.
        #[arg(long)]
        exact: bool,
        /// Coupling strength, used with --exact.
        #[arg(long, default_value_t = 1e-3)]
        g: f64,
        /// Pointer spread, used with --exact.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Draw seeded Monte Carlo pointer readings for a weakly coupled
    /// operator and compare the estimate with the exact prediction.
    WeakMc {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        operator: String,
        /// Coupling strength.
        #[arg(long)]
        g: f64,
        /// Pointer spread.
        #[arg(long)]
        delta: f64,
        /// Number of post-selected readings to draw.
        #[arg(long)]
        post_samples: u64,
        /// RNG seed; required so that every run is reproducible.
        #[arg(long)]
        seed: u64,
        /// Density/CDF grid resolution.
        #[arg(long, default_value_t = 16384)]
        grid: usize,
        /// Number of independent sampling streams.
        #[arg(long, default_value_t = 1)]
        shards: usize,
    },
}

enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

/// Does this error mean the requested pre/post-selection cannot occur at all?
fn unreachable_selection(e: &Error) -> bool {
    match e {
        Error::ImpossibleOutcome { .. }
        | Error::UnreachablePostSelection { .. }
        | Error::OrthogonalSelection { .. } => true,
        Error::StepFailed { source, .. } | Error::OrderingFailed { source, .. } => {
            unreachable_selection(source)
        }
        _ => false,
    }
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Usage(_) => 1,
        CliError::Core(e) => {
            if unreachable_selection(e) {
                3
            } else {
                2
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Numeric tolerance: `TSVF_EPS` when set, 1e-12 otherwise.
fn effective_eps() -> Result<f64, CliError> {
    let Some(raw) = std::env::var_os("TSVF_EPS") else {
        return Ok(DEFAULT_EPS);
    };
    let raw = raw.to_string_lossy();
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|eps| eps.is_finite() && *eps > 0.0 && *eps < 1.0)
        .ok_or_else(|| {
            CliError::Core(Error::BadConfig(format!(
                "TSVF_EPS must be a finite float in (0, 1), got '{raw}'"
            )))
        })
}

fn resolve_scenario(arg: &str, eps: f64) -> Result<Scenario, CliError> {
    if let Some(scenario) = scenarios::builtin(arg) {
        return Ok(scenario);
    }
    let path = Path::new(arg);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "unknown scenario '{}': not a built-in ({}) and not a file",
            arg,
            scenarios::builtin_names().join(", ")
        )));
    }
    let json = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read '{arg}': {e}")))?;
    Ok(scenarios::load_scenario_str(&json, eps)?)
}

fn emit<B: Serialize + RenderText>(scenario: Option<&str>, eps: f64, body: B, format: Format) {
    let report = Report {
        tool: TOOL,
        version: VERSION,
        eps,
        scenario: scenario.map(str::to_string),
        body,
    };
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"))
        }
        Format::Text => print!("{}", report.render_text()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let eps = effective_eps()?;
    let format = cli.format;
    match cli.command {
        Command::List => {
            let builtins = scenarios::builtin_names()
                .iter()
                .map(|name| {
                    let s = scenarios::builtin(name).expect("listed built-in exists");
                    BuiltinSummary {
                        name: s.name().to_string(),
                        dims: s.layout().dims().to_vec(),
                        events: s.events().iter().map(|e| e.id.clone()).collect(),
                        analyses: s.analyses().len(),
                    }
                })
                .collect();
            emit(None, eps, ListBody { builtins }, format);
        }
        Command::Run { scenario, ordering } => {
            let sc = resolve_scenario(&scenario, eps)?;
            match ordering {
                Some(spec) => {
                    let ordering =
                        Ordering::new(spec.split(',').map(str::trim).filter(|s| !s.is_empty()));
                    let run = frames::run_ordering(sc.initial(), sc.events(), &ordering, eps)?;
                    emit(Some(sc.name()), eps, single_run_body(&run), format);
                }
                None => {
                    let orderings = sc.comparison_orderings().unwrap_or_else(|| {
                        let listed: Vec<&str> =
                            sc.events().iter().map(|e| e.id.as_str()).collect();
                        let reversed: Vec<&str> = listed.iter().copied().rev().collect();
                        vec![Ordering::new(listed), Ordering::new(reversed)]
                    });
                    let cmp =
                        frames::compare_orderings(sc.initial(), sc.events(), &orderings, eps)?;
                    emit(Some(sc.name()), eps, comparison_body(&cmp, &orderings), format);
                }
            }
        }
        Command::Abl { scenario, observable } => {
            let sc = resolve_scenario(&scenario, eps)?;
            let obs = scenarios::parse_operator_spec(&observable, sc.layout())?;
            let tsv = sc.two_state_vector(eps)?;
            let dist = tsvf::abl_distribution(&tsv, &obs, eps)?;
            let body = AblBody {
                observable,
                entries: abl_rows(&dist),
                denominator: dist.denominator(),
            };
            emit(Some(sc.name()), eps, body, format);
        }
        Command::Eor { scenario, observable, tolerance } => {
            let sc = resolve_scenario(&scenario, eps)?;
            let obs = scenarios::parse_operator_spec(&observable, sc.layout())?;
            let tsv = sc.two_state_vector(eps)?;
            let element = tsvf::element_of_reality(&tsv, &obs, tolerance, eps)?;
            let dist = tsvf::abl_distribution(&tsv, &obs, eps)?;
            let body = EorBody {
                observable,
                tolerance,
                element: element.as_ref().map(eor_row),
                entries: abl_rows(&dist),
            };
            emit(Some(sc.name()), eps, body, format);
        }
        Command::CheckRules { scenario, a, b, tolerance } => {
            let sc = resolve_scenario(&scenario, eps)?;
            let obs_a = scenarios::parse_operator_spec(&a, sc.layout())?;
            let obs_b = scenarios::parse_operator_spec(&b, sc.layout())?;
            let tsv = sc.two_state_vector(eps)?;
            let report = tsvf::product_rule_check(&tsv, &obs_a, &obs_b, tolerance, eps)?;
            emit(Some(sc.name()), eps, rules_body(&a, &b, tolerance, &report), format);
        }
        Command::Weak { scenario, operator, exact, g, delta } => {
            let sc = resolve_scenario(&scenario, eps)?;
            let obs = scenarios::parse_operator_spec(&operator, sc.layout())?;
            let tsv = sc.two_state_vector(eps)?;
            let value = weak::weak_value(&tsv, &obs.to_operator(), eps)?;
            let exact = if exact {
                let config = WeakMeasurementConfig::new(g, delta, 1, 0);
                let density = weak::pointer_density(&tsv, &obs, &config, eps)?;
                Some(ExactPointer {
                    g,
                    delta,
                    mean_over_g: density.mean() / g,
                    std_dev: density.std(),
                    post_selection_rate: density.normalization(),
                    disturbance_fidelity: weak::disturbance_fidelity(tsv.pre(), &obs, g, delta)?,
                })
            } else {
                None
            };
            let body = WeakBody { operator, weak_value: [value.re, value.im], exact };
            emit(Some(sc.name()), eps, body, format);
        }
        Command::WeakMc { scenario, operator, g, delta, post_samples, seed, grid, shards } => {
            let sc = resolve_scenario(&scenario, eps)?;
            let obs = scenarios::parse_operator_spec(&operator, sc.layout())?;
            let tsv = sc.two_state_vector(eps)?;
            let config = WeakMeasurementConfig::new(g, delta, post_samples, seed)
                .with_grid_points(grid)
                .with_shards(shards);
            let run = weak::sample_pointer(&tsv, &obs, &config, eps)?;
            emit(Some(sc.name()), eps, weak_mc_body(&operator, &config, &run), format);
        }
    }
    Ok(())
}
