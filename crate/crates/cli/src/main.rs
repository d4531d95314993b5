//! `ris-a2g`: run a scenario over a speed and seed sweep and write CSV results.
//!
//! Exit status is 0 on success, 2 for configuration problems (bad flags,
//! unknown preset, invalid scenario file) and 3 when an output file cannot
//! be written.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, ValueEnum};
use ris_a2g::config::{load_scenario, ScenarioSource};
use ris_a2g::control::ReconfigPolicy;
use ris_a2g::engine::{compare, run, Execution, Scenario};
use ris_a2g::presets::{self, KMH};
use ris_a2g::report::{frames_csv, summary_csv, write_results};
use ris_a2g::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Fixed,
    Adaptive,
    Genie,
}

#[derive(Debug, Parser)]
#[command(name = "ris-a2g", version, about = "Link-level simulator for a RIS-equipped UAV relay")]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
struct Cli {
    /// Built-in scenario: paper-fig5, static-uav or nomadic-uav.
    #[arg(long)]
    preset: Option<String>,

    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the reconfiguration policy. With the paper-fig5 preset this
    /// selects which of its curves to run; without it all four are run.
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,

    /// Comma-separated UAV speeds in km/h [default: the scenario's own speed,
    /// or 5,10,...,50 for paper-fig5].
    #[arg(long, value_delimiter = ',', value_name = "KMH")]
    speeds_kmh: Option<Vec<f64>>,

    /// Seeds to average over, as a list and/or inclusive ranges, e.g. `1-10` or `3,5,9`
    /// [default: the scenario seed].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    seeds: Option<Vec<String>>,

    /// Base scenario seed; also the seed of the `--frames-out` run.
    #[arg(long)]
    seed: Option<u64>,

    /// Summary CSV path [default: standard output].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Per-frame CSV of one run (first policy, first speed, base seed).
    #[arg(long, value_name = "PATH")]
    frames_out: Option<PathBuf>,

    /// Evaluate sweep points one at a time.
    #[arg(long)]
    sequential: bool,

    /// Print progress and timing to stderr.
    #[arg(short, long)]
    verbose: bool,
}

fn parse_seeds(items: &[String]) -> Result<Vec<u64>, Error> {
    let bad = |item: &str| Error::config("--seeds", format!("expected an integer or a range like 1-10, got `{item}`"));
    let mut seeds = Vec::new();
    for item in items {
        let item = item.trim();
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad(item))?, b.parse().map_err(|_| bad(item))?);
                if a > b {
                    return Err(bad(item));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(item.parse().map_err(|_| bad(item))?),
        }
    }
    if seeds.is_empty() {
        return Err(bad(""));
    }
    Ok(seeds)
}

fn with_policy(base: &Scenario, policy: PolicyArg) -> (String, Scenario) {
    match policy {
        PolicyArg::Genie => ("genie".into(), base.genie()),
        PolicyArg::Fixed => {
            let mut s = base.clone();
            if !matches!(s.policy, ReconfigPolicy::FixedPeriod { .. }) {
                s.policy = ReconfigPolicy::FixedPeriod {
                    period_frames: presets::FIXED_FREQUENT_PERIOD,
                };
            }
            ("fixed".into(), s)
        }
        PolicyArg::Adaptive => {
            let mut s = base.clone();
            if !matches!(s.policy, ReconfigPolicy::Adaptive { .. }) {
                s.policy = ReconfigPolicy::Adaptive {
                    degradation_threshold: presets::ADAPTIVE_FREQUENT_THRESHOLD,
                    min_gap_frames: presets::ADAPTIVE_MIN_GAP,
                };
            }
            ("adaptive".into(), s)
        }
    }
}

/// The labelled scenarios to sweep.
fn variants(cli: &Cli, base: &Scenario) -> Result<Vec<(String, Scenario)>, Error> {
    let fig5 = cli.preset.as_deref() == Some("paper-fig5");
    Ok(match (fig5, cli.policy) {
        (true, None) => apply_base(presets::fig5_variants()?, base),
        (true, Some(p @ (PolicyArg::Fixed | PolicyArg::Adaptive))) => {
            let prefix = if p == PolicyArg::Fixed { "fixed_" } else { "adaptive_" };
            let picked = presets::fig5_variants()?
                .into_iter()
                .filter(|(label, _)| label.starts_with(prefix))
                .collect();
            apply_base(picked, base)
        }
        (_, Some(p)) => vec![with_policy(base, p)],
        (false, None) => vec![(base.policy.name().to_string(), base.clone())],
    })
}

/// Carries the command-line seed over to preset-derived variants.
fn apply_base(variants: Vec<(String, Scenario)>, base: &Scenario) -> Vec<(String, Scenario)> {
    variants
        .into_iter()
        .map(|(label, s)| (label, s.with_seed(base.seed)))
        .collect()
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let source = match (&cli.preset, &cli.config) {
        (Some(name), None) => ScenarioSource::Preset(name.clone()),
        (None, Some(path)) => ScenarioSource::File(path.clone()),
        _ => unreachable!("clap enforces exactly one scenario source"),
    };
    let mut base = load_scenario(&source)?;
    if let Some(seed) = cli.seed {
        base.seed = seed;
    }
    let variants = variants(cli, &base)?;

    let speeds: Vec<f64> = match &cli.speeds_kmh {
        Some(v) => v.iter().map(|k| k * KMH).collect(),
        None if cli.preset.as_deref() == Some("paper-fig5") => presets::fig5_speeds_mps(),
        None => vec![base.trajectory.speed],
    };
    if let Some(bad) = speeds.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::config(
            "--speeds-kmh",
            format!("speeds must be finite and >= 0, got {}", bad / KMH),
        ));
    }
    let seeds = match &cli.seeds {
        Some(items) => parse_seeds(items)?,
        None => vec![base.seed],
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };

    let start = Instant::now();
    if cli.verbose {
        eprintln!(
            "sweeping {} polic{} x {} speed(s) x {} seed(s)",
            variants.len(),
            if variants.len() == 1 { "y" } else { "ies" },
            speeds.len(),
            seeds.len()
        );
    }
    let summaries = compare(&variants, &speeds, &seeds, exec)?;
    if cli.verbose {
        eprintln!("sweep finished in {:.2} s", start.elapsed().as_secs_f64());
    }

    let frames = match &cli.frames_out {
        Some(path) => {
            let scenario = variants[0].1.with_speed(speeds[0]);
            Some((run(&scenario)?, path.as_path()))
        }
        None => None,
    };
    match &cli.out {
        Some(path) => write_results(&summaries, frames.as_ref().map(|(f, p)| (f.as_slice(), *p)), path)?,
        None => {
            print!("{}", summary_csv(&summaries));
            if let Some((f, path)) = &frames {
                std::fs::write(path, frames_csv(f)).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        Error::SweepPoint { source, .. } => exit_code(source),
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
