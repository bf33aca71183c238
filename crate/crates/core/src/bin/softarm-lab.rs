use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use softarm::finder::find_constraint_set;
use softarm::sim::{
    box_to_toml, export_csv, parse_finder_file, parse_override_value, parse_scenario_with_overrides, run_scenario,
    Metrics, RunOutcome,
};
use softarm::Error;

#[derive(Parser)]
#[command(name = "softarm-lab", version, about = "Soft-arm MPC simulation bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop scenario and write its CSV log.
    Run {
        scenario: PathBuf,
        /// Output directory for the log.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Control rate, Hz.
        #[arg(long)]
        rate: Option<f64>,
        /// robust_mpc, penalized_mpc, soft_mpc or quasi_static.
        #[arg(long)]
        controller: Option<String>,
        /// Log zero solve times so that repeated runs give identical files.
        #[arg(long)]
        no_timing: bool,
    },
    /// Search a joint-space constraint box and print it as a `[box]` table.
    FindBox {
        finder: PathBuf,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of a dotted parameter path.
    Sweep {
        scenario: PathBuf,
        /// Dotted path into the scenario file, e.g. `mpc.horizon`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
        values: Vec<String>,
        /// Write one CSV log per value into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a scenario or finder file without running it.
    Validate { file: PathBuf },
}

enum Failure {
    Validation(Error),
    Abort(Error),
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidConfig { .. } | Error::Dimension(_) => Failure::Validation(e),
            other => Failure::Other(other),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Other(Error::Io(e)))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
}

fn print_metrics(m: &Metrics) {
    println!("steps = {}", m.steps);
    println!("rmse_m = {:.6e}", m.rmse);
    println!("max_error_m = {:.6e}", m.max_error);
    println!("min_clearance_m = {:.6e}", m.min_clearance);
    println!("mean_solve_ms = {:.3}", m.mean_solve_ms);
    println!("max_solve_ms = {:.3}", m.max_solve_ms);
    println!("deadline_misses = {}", m.deadline_misses);
    println!("constraint_violations = {}", m.constraint_violations);
    println!("clamp_active_steps = {}", m.clamp_active_steps);
    println!("fallback_steps = {}", m.fallback_steps);
    println!("max_slack_norm = {:.6e}", m.max_slack_norm);
}

fn write_log(outcome: &RunOutcome, dir: &Path, name: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Other(Error::Io(e)))?;
    let path = dir.join(format!("{name}.csv"));
    export_csv(&outcome.log, &path).map_err(Failure::Other)?;
    Ok(path)
}

fn run(
    scenario: &Path,
    out: &Path,
    seed: Option<u64>,
    rate: Option<f64>,
    controller: Option<String>,
    no_timing: bool,
) -> Result<(), Failure> {
    let text = read(scenario)?;
    let mut overrides = Vec::new();
    if let Some(s) = seed {
        overrides.push(("seed".to_string(), toml::Value::Integer(s as i64)));
    }
    if let Some(r) = rate {
        overrides.push(("rate".to_string(), toml::Value::Float(r)));
    }
    if let Some(c) = controller {
        overrides.push(("controller".to_string(), toml::Value::String(c)));
    }
    if no_timing {
        overrides.push(("log_solve_time".to_string(), toml::Value::Boolean(false)));
    }
    let sc = parse_scenario_with_overrides(&text, &overrides)?;
    let outcome = run_scenario(&sc)?;
    let path = write_log(&outcome, out, &stem(scenario))?;
    println!("log = {}", path.display());
    print_metrics(&outcome.metrics);
    match outcome.abort {
        Some(e) => Err(Failure::Abort(e)),
        None => Ok(()),
    }
}

fn find_box(finder: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let job = parse_finder_file(&read(finder)?)?;
    let report = find_constraint_set(&job.config, &job.geometry).map_err(Failure::Other)?;
    let text = box_to_toml(&report.constraint_box);
    print!("{text}");
    eprintln!(
        "standard box: {}, accepted candidates: {}, size: {:.6}",
        report.standard,
        report.accepted.len(),
        report.constraint_box.size()
    );
    if let Some(path) = out {
        std::fs::write(path, text).map_err(|e| Failure::Other(Error::Io(e)))?;
    }
    Ok(())
}

fn sweep(scenario: &Path, param: &str, values: &[String], out: Option<PathBuf>, no_timing: bool) -> Result<(), Failure> {
    let text = read(scenario)?;
    let mut runs = Vec::new();
    for v in values {
        let mut overrides = vec![(param.to_string(), parse_override_value(v))];
        if no_timing {
            overrides.push(("log_solve_time".to_string(), toml::Value::Boolean(false)));
        }
        runs.push((v, parse_scenario_with_overrides(&text, &overrides)?));
    }
    println!("value,rmse_m,max_error_m,min_clearance_m,mean_solve_ms,constraint_violations,status");
    let mut aborted = None;
    for (v, sc) in runs {
        let outcome = run_scenario(&sc)?;
        if let Some(dir) = &out {
            write_log(&outcome, dir, &format!("{}_{}_{}", stem(scenario), param.replace('.', "-"), v))?;
        }
        let m = &outcome.metrics;
        let status = if outcome.abort.is_some() { "abort" } else { "ok" };
        println!(
            "{v},{:.6e},{:.6e},{:.6e},{:.3},{},{status}",
            m.rmse, m.max_error, m.min_clearance, m.mean_solve_ms, m.constraint_violations
        );
        if let Some(e) = outcome.abort {
            aborted.get_or_insert(e);
        }
    }
    match aborted {
        Some(e) => Err(Failure::Abort(e)),
        None => Ok(()),
    }
}

fn validate(file: &Path) -> Result<(), Failure> {
    let text = read(file)?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Failure::Validation(Error::Parse(e.to_string())))?;
    if table.contains_key("duration") || !table.contains_key("finder") {
        let sc = parse_scenario_with_overrides(&text, &[])?;
        println!(
            "ok: scenario `{}` ({}, {} steps at {} Hz, q_size {})",
            sc.name,
            sc.controller.name(),
            sc.steps(),
            sc.rate,
            sc.geometry.q_size()
        );
    } else {
        let job = parse_finder_file(&text)?;
        println!(
            "ok: finder `{}` ({} trials, {} samples, {} targets, {} obstacles)",
            job.name,
            job.config.n_trials,
            job.config.n_samples,
            job.config.targets.len(),
            job.config.obstacles.len()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, seed, rate, controller, no_timing } => {
            run(&scenario, &out, seed, rate, controller, no_timing)
        }
        Command::FindBox { finder, out } => find_box(&finder, out),
        Command::Sweep { scenario, param, values, out, no_timing } => sweep(&scenario, &param, &values, out, no_timing),
        Command::Validate { file } => validate(&file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("validation error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Abort(e)) => {
            eprintln!("scenario aborted: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
