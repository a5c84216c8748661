//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 the run
//! diverged, 3 a certificate was violated.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{dump_config, load_config};
use crate::dynamics::JOINT_NAMES;
use crate::error::{Error, Result};
use crate::sim::log::{read_log, switches_from_log, write_log, write_switches};
use crate::sim::monitors::{certify, design_gain_checks};
use crate::sim::scenario::{Preset, Scenario};
use crate::sim::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cablesync", version, about = "Cable-driven exoskeleton controller simulator and certificate checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Built-in scenario (nominal, perturbed, paper_v).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MonitorArgs {
    #[arg(long)]
    no_guub: bool,
    #[arg(long)]
    no_sync: bool,
    #[arg(long)]
    no_dwell: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write log.csv, switches.csv, config.txt and report.txt.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        monitors: MonitorArgs,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the follower gain conditions for the scenario's trajectory.
    CheckGains {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Run the monitors over an existing log.
    Certify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        monitors: MonitorArgs,
        /// Log in the simulator's CSV layout.
        #[arg(long)]
        log: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    Presets,
    /// Print the full configuration of a scenario.
    DumpConfig {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    match (&args.preset, &args.config) {
        (_, Some(path)) => load_config(path),
        (Some(name), None) => Ok(Scenario::preset(name.parse::<Preset>()?)),
        (None, None) => Ok(Scenario::default()),
    }
}

fn apply_monitors(s: &mut Scenario, m: &MonitorArgs) {
    s.monitor.guub &= !m.no_guub;
    s.monitor.sync &= !m.no_sync;
    s.monitor.dwell &= !m.no_dwell;
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_run(scenario: &Scenario, out: &Path) -> Result<i32> {
    fs::create_dir_all(out)?;
    let (sim, report) = run(scenario)?;
    write_file(&out.join("log.csv"), |w| write_log(w, &sim.log))?;
    write_file(&out.join("switches.csv"), |w| write_switches(w, &sim.switches))?;
    fs::write(out.join("config.txt"), dump_config(scenario))?;
    let text = report.to_text();
    fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(if sim.divergence.is_some() {
        EXIT_DIVERGED
    } else if report.pass() {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    })
}

fn cmd_check_gains(scenario: &Scenario) -> Result<i32> {
    let derived = scenario.derive()?;
    let checks = design_gain_checks(scenario, &derived)?;
    println!("B_lower: {}", derived.bounds.b_lower);
    for (name, c) in JOINT_NAMES.iter().zip(&checks) {
        let v = c.verdict;
        println!(
            "{name}: c1 = {:.6} c2 = {:.6} k3 {} (margin {:.6}) k4 {} (margin {:.6})",
            c.chi.c1,
            c.chi.c2,
            if v.k3_pass { "pass" } else { "fail" },
            v.k3_margin,
            if v.k4_pass { "pass" } else { "fail" },
            v.k4_margin,
        );
    }
    let all = checks.iter().all(|c| c.verdict.pass());
    println!("gain_conditions: {}", if all { "pass" } else { "fail" });
    Ok(if all { EXIT_OK } else { EXIT_CERTIFICATE })
}

fn cmd_certify(scenario: &Scenario, log_path: &Path, report_path: Option<&Path>) -> Result<i32> {
    let derived = scenario.derive()?;
    let log = read_log(BufReader::new(File::open(log_path)?))?;
    if log.is_empty() {
        return Err(Error::Log("log has no rows".into()));
    }
    let switches = switches_from_log(&log);
    let report = certify(&log, &switches, 0, None, scenario, &derived);
    let text = report.to_text();
    match report_path {
        Some(p) => fs::write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(if report.pass() { EXIT_OK } else { EXIT_CERTIFICATE })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { scenario, monitors, out } => {
            let mut s = load_scenario(&scenario)?;
            apply_monitors(&mut s, &monitors);
            cmd_run(&s, &out)
        }
        Command::CheckGains { scenario } => cmd_check_gains(&load_scenario(&scenario)?),
        Command::Certify { scenario, monitors, log, report } => {
            let mut s = load_scenario(&scenario)?;
            apply_monitors(&mut s, &monitors);
            cmd_certify(&s, &log, report.as_deref())
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<10} {}", p.name(), p.description());
            }
            Ok(EXIT_OK)
        }
        Command::DumpConfig { scenario } => {
            print!("{}", dump_config(&load_scenario(&scenario)?));
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Diverged { .. } => EXIT_DIVERGED,
                _ => EXIT_USAGE,
            }
        }
    }
}
