//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::attack::CaseId;
use crate::config::{load_config, ConfigError, ExperimentConfig};
use crate::experiment::{
    results_csv, roc_csv, separation_csv, summary_table, Experiment, ExperimentError,
};
use crate::selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "icls",
    version,
    about = "Localization attack and detection simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Overrides `experiment.master_seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Restricts the run to one case: none, jam, spoof, beacon_sync, relay_af.
    #[arg(long, global = true, value_name = "NAME")]
    pub case: Option<String>,
    /// Repeat for more log output.
    #[arg(short, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// All cases at all target powers; writes sweep.csv.
    Sweep,
    /// One case (from --case) at all target powers; writes case_<name>.csv.
    Case,
    /// Threshold sweep of the KL detector; writes roc.csv.
    Roc,
    /// Baselines, calibrated thresholds and separation margins; writes
    /// calibration.csv and fingerprint maps.
    Calibrate,
    /// Runs the built-in example checks.
    Selftest,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(c) => Failure::Config(c.to_string()),
            ExperimentError::Attack(a) => Failure::Config(a.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.master_seed = seed;
    }
    if let Some(name) = &cli.case {
        let case: CaseId = name
            .parse()
            .map_err(|e: crate::attack::AttackError| Failure::Config(e.to_string()))?;
        cfg.experiment.cases = vec![case.name().to_string()];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.command == Command::Selftest {
        let results = selftest::run_all();
        let mut failed = 0;
        for r in &results {
            match &r.outcome {
                Ok(()) => println!("PASS {}", r.name),
                Err(msg) => {
                    failed += 1;
                    println!("FAIL {}: {msg}", r.name);
                }
            }
        }
        println!(
            "{} of {} checks passed",
            results.len() - failed,
            results.len()
        );
        return if failed == 0 {
            Ok(())
        } else {
            Err(Failure::Runtime(format!("{failed} selftest checks failed")))
        };
    }

    let cfg = resolve_config(cli)?;
    if cli.command == Command::Case && cli.case.is_none() {
        return Err(Failure::Config("`case` needs --case NAME".into()));
    }
    let experiment = Experiment::new(cfg)?;
    prepare_out(&cli.out)?;

    match cli.command {
        Command::Sweep | Command::Case => {
            let reports = experiment.sweep()?;
            let rows: Vec<_> = reports.iter().map(|r| r.row.clone()).collect();
            let name = match (cli.command, &cli.case) {
                (Command::Case, Some(c)) => format!("case_{c}.csv"),
                _ => "sweep.csv".to_string(),
            };
            let path = write(&cli.out, &name, &results_csv(&rows))?;
            print!("{}", summary_table(&reports));
            println!("wrote {}", path.display());
        }
        Command::Roc => {
            let thresholds = experiment.config.experiment.roc_thresholds.clone();
            let rows = experiment.roc_sweep(&thresholds)?;
            let path = write(&cli.out, "roc.csv", &roc_csv(&rows))?;
            println!("{} ROC points, wrote {}", rows.len(), path.display());
        }
        Command::Calibrate => {
            for &p in &experiment.config.experiment.target_powers_dbm {
                let map = experiment.fingerprints(p);
                write(&cli.out, &format!("fingerprints_{p}dBm.csv"), &map.to_csv())?;
            }
            let rows = experiment.separation()?;
            let path = write(&cli.out, "calibration.csv", &separation_csv(&rows))?;
            println!(
                "{:<12} {:>7} {:>10} {:>10} {:>10} {:>10} {:>7} {:>7} {:>7} {:>7}",
                "case",
                "P[dBm]",
                "threshold",
                "maxBenign",
                "minAttack",
                "margin",
                "det@cal",
                "fa@cal",
                "det@def",
                "fa@def"
            );
            for r in &rows {
                println!(
                    "{:<12} {:>7} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>7.3} {:>7.3} {:>7.3} {:>7.3}",
                    r.case.name(),
                    r.target_power_dbm,
                    r.calibrated_threshold,
                    r.max_benign_kl,
                    r.min_attack_kl,
                    r.margin,
                    r.detection_at_calibrated,
                    r.false_alarm_at_calibrated,
                    r.detection_at_default,
                    r.false_alarm_at_default
                );
            }
            println!(
                "default threshold {} nats; margin = min attack KL - max benign KL",
                experiment.config.detector.threshold
            );
            println!("wrote {}", path.display());
        }
        Command::Selftest => unreachable!(),
    }
    Ok(())
}

/// Runs the parsed invocation and maps the outcome to an exit code.
pub fn dispatch(cli: &Cli) -> i32 {
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
}
