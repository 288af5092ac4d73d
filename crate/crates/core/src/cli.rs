//! Command-line front end.
//!
//! Every artifact is written to `--out` or standard output and ends with a
//! newline. Nothing time- or environment-dependent is emitted.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::benchmark::{generate_synthetic, load_dataset, validate_case_types};
use crate::engine::{classify_with, parse_case, ConditionScores, Semantics};
use crate::error::{Error, Result};
use crate::evaluation::{compare_operators, evaluate_with, sweep_to_csv, threshold_sweep_with};
use crate::rulebase::{default_ruleset, load_ruleset, RuleSet};
use crate::tnorm::{TNormKind, UnitScore};

#[derive(Debug, Parser)]
#[command(
    name = "tnorm-risk",
    version,
    about = "Fuzzy-conjunction risk classification and operator benchmarking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify one case and print its proof trail as JSON.
    Classify {
        #[arg(long, value_name = "PATH")]
        case: PathBuf,
        #[command(flatten)]
        operator: OperatorArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate one operator on a dataset and print the report as JSON.
    Evaluate {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[command(flatten)]
        operator: OperatorArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate several operators and run pairwise McNemar tests.
    Compare {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(
            long,
            value_name = "CSV",
            value_delimiter = ',',
            default_value = "lukasiewicz,product,goedel"
        )]
        tnorms: Vec<TNormKind>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the threshold and print an accuracy/error curve as CSV.
    Sweep {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(long, value_name = "NAME", conflicts_with_all = ["tnorms", "mixed"])]
        tnorm: Option<TNormKind>,
        #[arg(
            long,
            value_name = "CSV",
            value_delimiter = ',',
            conflicts_with = "mixed"
        )]
        tnorms: Option<Vec<TNormKind>>,
        #[arg(long)]
        mixed: bool,
        #[arg(long = "theta-min", default_value_t = 0.25)]
        theta_min: f64,
        #[arg(long = "theta-max", default_value_t = 0.75)]
        theta_max: f64,
        #[arg(long = "theta-step", default_value_t = 0.05)]
        theta_step: f64,
        #[arg(long, value_name = "PATH|default", default_value = "default")]
        rules: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Generate a seeded synthetic dataset as JSON Lines.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_name = "PATH|default", default_value = "default")]
        rules: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Validate a rule file, or a dataset's case types.
    Validate {
        #[arg(long, value_name = "PATH")]
        dataset: Option<PathBuf>,
        #[arg(long, value_name = "PATH|default", default_value = "default")]
        rules: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// `--tnorm NAME` or `--mixed`, exactly one.
#[derive(Debug, Args)]
pub struct OperatorArgs {
    #[arg(
        long,
        value_name = "NAME",
        required_unless_present = "mixed",
        conflicts_with = "mixed"
    )]
    pub tnorm: Option<TNormKind>,
    /// Per-rule operators from each rule's `standard` annotation.
    #[arg(long)]
    pub mixed: bool,
}

impl OperatorArgs {
    fn semantics(&self) -> Semantics {
        match self.tnorm {
            Some(k) if !self.mixed => Semantics::Uniform(k),
            _ => Semantics::Mixed,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH|default", default_value = "default")]
    pub rules: String,
    /// Global threshold override for every rule.
    #[arg(long, value_name = "FLOAT")]
    pub theta: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn theta(&self) -> Result<Option<UnitScore>> {
        self.theta
            .map(|t| {
                UnitScore::new(t)
                    .map_err(|_| Error::InvalidArgument(format!("--theta {t} is outside [0, 1]")))
            })
            .transpose()
    }
}

fn resolve_rules(source: &str) -> Result<RuleSet> {
    if source == "default" {
        Ok(default_ruleset())
    } else {
        load_ruleset(source)
    }
}

fn read_case(path: &Path, ruleset: &RuleSet) -> Result<(Option<String>, ConditionScores)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_case(&text, &path.display().to_string(), ruleset)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    debug_assert!(text.ends_with('\n'));
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Classify {
            case,
            operator,
            common,
        } => {
            let rules = resolve_rules(&common.rules)?;
            let (case_id, scores) = read_case(case, &rules)?;
            let mut outcome =
                classify_with(&scores, &rules, operator.semantics(), common.theta()?)?;
            outcome.case_id = case_id;
            emit(common.out.as_deref(), stdout, &outcome.to_json_string())
        }
        Command::Evaluate {
            dataset,
            operator,
            common,
        } => {
            let rules = resolve_rules(&common.rules)?;
            let ds = load_dataset(dataset, &rules)?;
            let report = evaluate_with(&ds, &rules, operator.semantics(), common.theta()?)?;
            emit(common.out.as_deref(), stdout, &report.to_json_string())
        }
        Command::Compare {
            dataset,
            tnorms,
            common,
        } => {
            let rules = resolve_rules(&common.rules)?;
            let ds = load_dataset(dataset, &rules)?;
            let cmp = compare_operators(&ds, &rules, tnorms, common.theta()?)?;
            emit(common.out.as_deref(), stdout, &cmp.to_json_string())
        }
        Command::Sweep {
            dataset,
            tnorm,
            tnorms,
            mixed,
            theta_min,
            theta_max,
            theta_step,
            rules,
            out,
        } => {
            let rules = resolve_rules(rules)?;
            let ds = load_dataset(dataset, &rules)?;
            let semantics: Vec<Semantics> = if *mixed {
                vec![Semantics::Mixed]
            } else if let Some(k) = tnorm {
                vec![Semantics::Uniform(*k)]
            } else {
                tnorms
                    .as_deref()
                    .unwrap_or(&TNormKind::CANONICAL)
                    .iter()
                    .map(|&k| Semantics::Uniform(k))
                    .collect()
            };
            let points =
                threshold_sweep_with(&ds, &rules, &semantics, *theta_min, *theta_max, *theta_step)?;
            emit(out.as_deref(), stdout, &sweep_to_csv(&points))
        }
        Command::Generate {
            n,
            seed,
            rules,
            out,
        } => {
            let rules = resolve_rules(rules)?;
            let ds = generate_synthetic(*n, *seed, &rules)?;
            emit(out.as_deref(), stdout, &ds.to_jsonl_string())
        }
        Command::Validate {
            dataset,
            rules,
            out,
        } => {
            let rules = resolve_rules(rules)?;
            let text = match dataset {
                Some(path) => {
                    let ds = load_dataset(path, &rules)?;
                    let warnings = validate_case_types(&ds);
                    let mut text = String::new();
                    for w in &warnings {
                        text.push_str(&format!("warning: {w}\n"));
                    }
                    text.push_str(&format!(
                        "{} cases checked, {} warnings\n",
                        ds.len(),
                        warnings.len()
                    ));
                    text
                }
                None => format!(
                    "rules ok: {} rules over {} conditions\n",
                    rules.rules().len(),
                    rules.vocabulary().len()
                ),
            };
            emit(out.as_deref(), stdout, &text)
        }
    }
}
