use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use auctionlab::mechanisms::MechanismKind;
use auctionlab::montecarlo::{run_trials, RunOptions, Scenario, TrialReport};
use auctionlab::properties::{
    anonymity_battery, check_no_overbid_incentive_share, check_weak_dominance,
    revenue_equivalence_test, share_auction_battery, summary_scorecard, DominanceGrid,
    ShareOverbidGrid, Verdict,
};
use auctionlab::{Error, ValidationError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::fixtures::{replay_fixture, write_india_table, FixtureName, FixtureSet};
use crate::report::{render, to_csv, to_value, Format};

/// Bad input from the user: exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 for invalid input, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let invalid = err.chain().any(|e| {
        e.is::<UsageError>()
            || e.is::<ValidationError>()
            || matches!(e.downcast_ref::<Error>(), Some(Error::Validation(_)))
    });
    if invalid {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "auctionlab",
    version,
    about = "Spectrum auction simulations, historical fixtures and property checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario's Monte Carlo trials.
    Run(RunArgs),
    /// Run one scenario under several mechanisms on the same seed.
    Compare(CompareArgs),
    /// Print or replay an embedded historical fixture.
    Fixture(FixtureArgs),
    /// Run property suites; exits 0 only if every suite passes.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// No summary line on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Overrides the scenario's trial count.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write a per-trial, per-license CSV log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub scenario: PathBuf,
    /// Comma-separated: fpsb, vickrey, scored, samr, share.
    #[arg(long)]
    pub mechanisms: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// india-table1, nz-1990, australia-1999 or india-weights.
    pub name: String,
    /// Replay the bids as fpsb, vickrey or samr.
    #[arg(long = "as")]
    pub as_mechanism: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the fixture's own form: CSV for the India table, JSON otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Dominance,
    Equivalence,
    Anonymity,
    Share,
}

impl Suite {
    const ALL: [Suite; 4] = [
        Suite::Dominance,
        Suite::Equivalence,
        Suite::Anonymity,
        Suite::Share,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::Dominance => "dominance",
            Suite::Equivalence => "equivalence",
            Suite::Anonymity => "anonymity",
            Suite::Share => "share",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Repeatable; all suites when omitted.
    #[arg(long = "suite", value_enum)]
    pub suites: Vec<Suite>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Trials per mechanism for the equivalence suite.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_toml_str(&text)
        .map_err(|e| anyhow::Error::new(e).context(format!("{}", path.display())))
}

fn with_trials(mut scenario: Scenario, trials: Option<u64>) -> Result<Scenario> {
    if let Some(t) = trials {
        scenario.trials = t;
        scenario.validate()?;
    }
    Ok(scenario)
}

pub fn parse_mechanisms(list: &str) -> Result<Vec<MechanismKind>> {
    let names: Vec<&str> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(UsageError("--mechanisms needs at least one mechanism".into()).into());
    }
    names
        .into_iter()
        .map(|n| {
            MechanismKind::parse(n).ok_or_else(|| {
                UsageError(format!(
                    "unknown mechanism {n:?}; expected fpsb, vickrey, scored, samr or share"
                ))
                .into()
            })
        })
        .collect()
}

fn mechanism_row(scenario: &Scenario, report: &TrialReport) -> Result<Value> {
    let v_g = scenario.config.share.as_ref().map(|s| s.valuation);
    let card = summary_scorecard(&report.summary, v_g, scenario.metrics.rollout_cost);
    Ok(json!({
        "mechanism": report.summary.mechanism,
        "summary": to_value(&report.summary)?,
        "scorecard": to_value(&card)?,
    }))
}

/// The `run` report and the full trial report it was built from.
pub fn run_report(
    scenario: &Scenario,
    seed: u64,
    threads: Option<usize>,
    keep_log: bool,
) -> Result<(Value, TrialReport)> {
    let report = run_trials(scenario, seed, RunOptions { threads, keep_log })?;
    let row = mechanism_row(scenario, &report)?;
    let value = json!({
        "command": "run",
        "seed": seed,
        "trials": scenario.trials,
        "mechanism": row["mechanism"],
        "summary": row["summary"],
        "scorecard": row["scorecard"],
    });
    Ok((value, report))
}

pub fn trial_log_csv(report: &TrialReport) -> Result<String> {
    let mut rows = Vec::new();
    for trial in report.log.iter().flatten() {
        for lic in &trial.licenses {
            let mut row = json!({"trial": trial.trial, "trial_revenue": trial.revenue, "rounds": trial.rounds});
            let fields = to_value(lic)?;
            row.as_object_mut()
                .expect("object")
                .extend(fields.as_object().expect("record is an object").clone());
            rows.push(row);
        }
    }
    to_csv(&to_value(&json!({ "rows": rows }))?)
}

pub fn compare_report(
    scenario: &Scenario,
    mechanisms: &[MechanismKind],
    seed: u64,
    threads: Option<usize>,
) -> Result<Value> {
    let variants: Vec<Scenario> = mechanisms
        .iter()
        .map(|&m| scenario.with_mechanism(m))
        .collect();
    let mut violations = Vec::new();
    for v in &variants {
        violations.extend(
            v.violations()
                .into_iter()
                .map(|e| format!("{}: {e}", v.mechanism)),
        );
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations }.into());
    }
    let rows = variants
        .iter()
        .map(|v| {
            let report = run_trials(
                v,
                seed,
                RunOptions {
                    threads,
                    keep_log: false,
                },
            )?;
            mechanism_row(v, &report)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "command": "compare",
        "seed": seed,
        "trials": scenario.trials,
        "rows": rows,
    }))
}

pub fn fixture_output(
    name: &str,
    as_mechanism: Option<&str>,
    seed: u64,
    format: Option<Format>,
) -> Result<String> {
    let fixture = FixtureName::parse(name).ok_or_else(|| {
        UsageError(format!("unknown fixture {name:?}; expected india-table1, nz-1990, australia-1999 or india-weights"))
    })?;
    let set = FixtureSet::embedded()?;
    let Some(mech) = as_mechanism else {
        return match (fixture, format) {
            (FixtureName::IndiaTable1, None | Some(Format::Csv)) => {
                write_india_table(&set.india_table1)
            }
            (FixtureName::IndiaTable1, Some(Format::Json)) => {
                render(&to_value(&set.india_table1)?, Format::Json)
            }
            (FixtureName::Nz1990, f) => render(&to_value(&set.nz_1990)?, f.unwrap_or(Format::Json)),
            (FixtureName::Australia1999, f) => {
                render(&to_value(&set.australia_1999)?, f.unwrap_or(Format::Json))
            }
            (FixtureName::IndiaWeights, f) => {
                render(&to_value(&set.india_weights)?, f.unwrap_or(Format::Json))
            }
        };
    };
    let mechanism = match MechanismKind::parse(mech) {
        Some(m @ (MechanismKind::Fpsb | MechanismKind::Vickrey | MechanismKind::Samr)) => m,
        _ => {
            return Err(UsageError(format!(
                "--as {mech:?}: fixtures replay as fpsb, vickrey or samr"
            ))
            .into())
        }
    };
    if fixture == FixtureName::IndiaWeights {
        return Err(UsageError(
            "india-weights holds scoring weights and cannot be replayed".into(),
        )
        .into());
    }
    let rows = replay_fixture(&set, fixture, mechanism, seed)?;
    let value = json!({
        "command": "fixture",
        "fixture": fixture.name(),
        "mechanism": mechanism,
        "seed": seed,
        "rows": to_value(&rows)?,
    });
    render(&value, format.unwrap_or(Format::Json))
}

/// Profiles per mechanism in the anonymity suite.
pub const ANONYMITY_PROFILES: usize = 100;
/// Random profiles in the share-auction battery.
pub const SHARE_PROFILES: usize = 1_000;

fn verify_suite(suite: Suite, seed: u64, trials: usize) -> Result<Value> {
    let v = match suite {
        Suite::Dominance => {
            let grid = DominanceGrid::default();
            let vickrey = check_weak_dominance(MechanismKind::Vickrey, &grid)?;
            let fpsb = check_weak_dominance(MechanismKind::Fpsb, &grid)?;
            let replays = match &fpsb.counterexample {
                Some(cx) => cx.replay(MechanismKind::Fpsb)?,
                None => false,
            };
            let pass = vickrey.verdict == Verdict::WeaklyDominant
                && fpsb.verdict == Verdict::NotDominant
                && replays;
            json!({
                "suite": suite.name(),
                "pass": pass,
                "vickrey": to_value(&vickrey)?,
                "fpsb": to_value(&fpsb)?,
                "fpsb_counterexample_replays": replays,
            })
        }
        Suite::Equivalence => {
            let reports = [2, 3, 5]
                .into_iter()
                .map(|n| revenue_equivalence_test(n, trials, seed))
                .collect::<auctionlab::Result<Vec<_>>>()?;
            json!({
                "suite": suite.name(),
                "pass": reports.iter().all(|r| r.pass),
                "reports": to_value(&reports)?,
            })
        }
        Suite::Anonymity => {
            let reports = MechanismKind::ALL
                .into_iter()
                .map(|m| anonymity_battery(m, ANONYMITY_PROFILES, seed))
                .collect::<auctionlab::Result<Vec<_>>>()?;
            json!({
                "suite": suite.name(),
                "pass": reports.iter().all(|r| r.pass()),
                "batteries": to_value(&reports)?,
            })
        }
        Suite::Share => {
            let battery = share_auction_battery(SHARE_PROFILES, seed)?;
            let overbid = check_no_overbid_incentive_share(&ShareOverbidGrid::default())?;
            json!({
                "suite": suite.name(),
                "pass": battery.pass() && overbid.verdict == Verdict::WeaklyDominant,
                "battery": to_value(&battery)?,
                "no_overbid": to_value(&overbid)?,
            })
        }
    };
    Ok(v)
}

/// The `verify` report and whether every suite passed.
pub fn verify_report(suites: &[Suite], seed: u64, trials: usize) -> Result<(Value, bool)> {
    let suites = if suites.is_empty() {
        &Suite::ALL[..]
    } else {
        suites
    };
    let rows = suites
        .iter()
        .map(|&s| verify_suite(s, seed, trials))
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r["pass"] == Value::Bool(true));
    Ok((
        json!({
            "command": "verify",
            "seed": seed,
            "pass": pass,
            "rows": rows,
        }),
        pass,
    ))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run(args) => {
            let scenario = with_trials(load_scenario(&args.scenario)?, args.trials)?;
            let (value, report) =
                run_report(&scenario, args.seed, args.threads, args.log.is_some())?;
            emit(
                &render(&value, args.output.format)?,
                args.output.out.as_deref(),
            )?;
            if let Some(path) = &args.log {
                emit(&trial_log_csv(&report)?, Some(path))?;
            }
            if !args.output.quiet {
                let s = &report.summary;
                eprintln!(
                    "{}: {} trials, mean revenue {:.6}, efficiency {:.4}",
                    s.mechanism, s.trials, s.mean_revenue, s.efficiency_rate
                );
            }
            Ok(0)
        }
        Command::Compare(args) => {
            let mechanisms = parse_mechanisms(&args.mechanisms)?;
            let scenario = with_trials(load_scenario(&args.scenario)?, args.trials)?;
            let value = compare_report(&scenario, &mechanisms, args.seed, args.threads)?;
            emit(
                &render(&value, args.output.format)?,
                args.output.out.as_deref(),
            )?;
            if !args.output.quiet {
                eprintln!(
                    "compared {} mechanisms over {} trials",
                    mechanisms.len(),
                    scenario.trials
                );
            }
            Ok(0)
        }
        Command::Fixture(args) => {
            let text = fixture_output(
                &args.name,
                args.as_mechanism.as_deref(),
                args.seed,
                args.format,
            )?;
            emit(&text, args.out.as_deref())?;
            Ok(0)
        }
        Command::Verify(args) => {
            let (value, pass) = verify_report(&args.suites, args.seed, args.trials)?;
            emit(
                &render(&value, args.output.format)?,
                args.output.out.as_deref(),
            )?;
            if !args.output.quiet {
                for row in value["rows"].as_array().into_iter().flatten() {
                    let status = if row["pass"] == Value::Bool(true) {
                        "PASS"
                    } else {
                        "FAIL"
                    };
                    eprintln!("{status} {}", row["suite"].as_str().unwrap_or("?"));
                }
            }
            Ok(if pass { 0 } else { 1 })
        }
    }
}
