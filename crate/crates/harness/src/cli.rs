//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Suite};
use crate::criteria;
use crate::error::{HarnessError, Result};
use crate::suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "oscavg", version, about = "Averaging experiments for highly oscillatory systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment suite and write CSV output.
    Run {
        #[arg(long)]
        suite: Suite,
        /// File of `key=value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a key, `key=value`; may be repeated.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate acceptance criteria listed in a file (`all` or ids).
    Check {
        #[arg(long)]
        criteria: PathBuf,
    },
}

fn build_config(suite: Suite, config: Option<&PathBuf>, set: &[String], out: PathBuf) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(suite);
    if let Some(path) = config {
        cfg.load_file(path)?;
    }
    for s in set {
        cfg.assign(s)?;
    }
    cfg.out = out;
    Ok(cfg)
}

fn run_suite(cfg: &ExperimentConfig) -> Result<bool> {
    let report = suites::run(cfg)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| HarnessError::io(&cfg.out, e))?;
    report.write(cfg, &cfg.out)?;
    for (k, v) in &report.summary {
        println!("{k} = {v}");
    }
    for (method, err) in &report.failures {
        eprintln!("{method}: {err}");
    }
    Ok(report.is_success())
}

fn exit_for(err: &HarnessError) -> i32 {
    eprintln!("oscavg: {err}");
    if err.is_config() { EXIT_CONFIG } else { EXIT_FAILED }
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { suite, config, set, out } => {
            let cfg = match build_config(suite, config.as_ref(), &set, out) {
                Ok(cfg) => cfg,
                Err(e) => return exit_for(&e),
            };
            match run_suite(&cfg) {
                Ok(true) => EXIT_OK,
                Ok(false) => EXIT_FAILED,
                Err(e) => exit_for(&e),
            }
        }
        Command::Check { criteria: path } => {
            let ids = match std::fs::read_to_string(&path) {
                Ok(text) => criteria::parse_list(&text),
                Err(e) => return exit_for(&HarnessError::io(&path, e)),
            };
            let ids = match ids {
                Ok(ids) => ids,
                Err(msg) => return exit_for(&HarnessError::Config(msg)),
            };
            let mut all = true;
            for id in ids {
                let outcome = criteria::evaluate(id);
                println!("{outcome}");
                all &= outcome.passed;
            }
            if all { EXIT_OK } else { EXIT_FAILED }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> i32 {
        let mut argv = vec!["oscavg"];
        argv.extend_from_slice(args);
        execute(Cli::try_parse_from(argv).expect("arguments parse"))
    }

    #[test]
    fn unknown_suite_is_rejected_by_parser() {
        assert!(Cli::try_parse_from(["oscavg", "run", "--suite", "nope"]).is_err());
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(exec(&["run", "--suite", "fpu", "--set", "bogus=1", "--out", out]), EXIT_CONFIG);
        assert_eq!(exec(&["run", "--suite", "fpu", "--set", "omega", "--out", out]), EXIT_CONFIG);
    }

    #[test]
    fn bad_config_value_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(exec(&["run", "--suite", "avgcheck", "--set", "systems=many", "--out", out]), EXIT_CONFIG);
    }

    #[test]
    fn avgcheck_run_writes_output() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("avg.cfg");
        std::fs::write(&cfg, "# small\nsystems = 2\nstates=3\n").unwrap();
        let out = dir.path().join("out");
        let code = exec(&["run", "--suite", "avgcheck", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.join("avgcheck_theorem1.csv").exists());
        let meta = std::fs::read_to_string(out.join("avgcheck_metadata.txt")).unwrap();
        assert!(meta.contains("systems"));
    }

    #[test]
    fn check_command_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.txt");
        std::fs::write(&good, "C11\n").unwrap();
        assert_eq!(exec(&["check", "--criteria", good.to_str().unwrap()]), EXIT_OK);
        let bad = dir.path().join("bad.txt");
        std::fs::write(&bad, "C42\n").unwrap();
        assert_eq!(exec(&["check", "--criteria", bad.to_str().unwrap()]), EXIT_CONFIG);
        let missing = dir.path().join("missing.txt");
        assert_eq!(exec(&["check", "--criteria", missing.to_str().unwrap()]), EXIT_FAILED);
    }
}
