//! `moranwave`: simulate the Moran model of adaptation, run parameter
//! sweeps, print wave-speed predictions and run the validation suites.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, failed validation
//! checks, coupling violation), 2 configuration error, 3 event budget
//! exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use moran_wave::experiments::validation::{run_validation, Suite};
use moran_wave::experiments::{run_sweep, ExperimentError, SweepConfig};
use moran_wave::io::{
    key_value_text, sweep_svg, write_sweep_csv, write_trajectory_csv, RunManifest,
};
use moran_wave::population::{IndividualState, Params, Population, DEFAULT_KD_BETA};
use moran_wave::sim::{
    simulate_classes, simulate_coupled, simulate_individuals, SimConfig, SimError, SimMode,
    DEFAULT_MAX_EVENTS,
};
use moran_wave::theory::predict_wave;

#[derive(Parser)]
#[command(
    name = "moranwave",
    version,
    about = "Moran model of adaptation: simulation, sweeps and predictions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory from the all-at-zero population and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a parameter sweep described by a JSON file.
    Sweep(SweepArgs),
    /// Print the predicted front lead, wave width and speed.
    Predict(PredictArgs),
    /// Run fixed-seed validation suites.
    Validate(ValidateArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    pop_size: u64,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    s: f64,
    /// Simulated time in generations.
    #[arg(long)]
    horizon: f64,
    /// Spacing of records; defaults to min(1, horizon).
    #[arg(long)]
    record_interval: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// class_level, individual_level or coupled_neutral (or class, individual, coupled).
    #[arg(long, default_value = "class_level")]
    mode: SimMode,
    #[arg(long, default_value_t = DEFAULT_KD_BETA)]
    kd_beta: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_EVENTS)]
    max_events: u64,
    /// Output CSV path. Without it the CSV goes to standard output. In
    /// coupled mode the neutral process is written next to it as
    /// `<stem>.neutral.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// JSON sweep configuration.
    config: PathBuf,
    /// Directory for sweep.csv, sweep.svg and sweep.manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of CPUs. Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(clap::Args)]
struct PredictArgs {
    /// Population size; any real number above 1 is accepted.
    #[arg(long)]
    pop_size: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    s: f64,
    /// Print JSON instead of key = value lines.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct ValidateArgs {
    /// Run only this suite: pgf, bounds, coupling, oracle or drift.
    #[arg(long)]
    suite: Option<Suite>,
    #[arg(long)]
    json: bool,
}

enum CliError {
    Config(String),
    Budget(String),
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Budget(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            SimError::DominationViolated { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Sim(s) => s.into(),
            ExperimentError::Config(_)
            | ExperimentError::Params(_)
            | ExperimentError::Theory(_) => CliError::Config(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Failure(format!("{}: {e}", path.display()))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(io_error(path))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(io_error(path))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Failure(format!("{}: {e}", path.display()))
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let started = now();
    let params = Params::new(args.pop_size, args.mu, args.q, args.s)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let record_interval = args.record_interval.unwrap_or(args.horizon.min(1.0));
    let mut cfg = SimConfig::new(params, args.horizon, record_interval, args.seed, args.mode);
    cfg.kd_beta = args.kd_beta;
    cfg.max_events = args.max_events;
    cfg.validate()?;

    let zeros = || vec![0i64; args.pop_size as usize];
    let (records, neutral) = match args.mode {
        SimMode::ClassLevel => {
            let initial = Population::point_mass(0, args.pop_size)
                .map_err(|e| CliError::Config(e.to_string()))?;
            (simulate_classes(&cfg, &initial)?.records, None)
        }
        SimMode::IndividualLevel => (
            simulate_individuals(&cfg, &IndividualState::new(zeros()))?.records,
            None,
        ),
        SimMode::CoupledNeutral => {
            if args.out.is_none() {
                return Err(CliError::Config(
                    "coupled mode writes two files and needs --out".into(),
                ));
            }
            let run = simulate_coupled(&cfg, &IndividualState::coupled(zeros()))?;
            let (x, y): (Vec<_>, Vec<_>) = run.records.into_iter().unzip();
            (x, Some(y))
        }
    };

    let Some(out) = args.out else {
        let stdout = std::io::stdout().lock();
        return match write_trajectory_csv(stdout, &records) {
            // A closed pipe (e.g. `| head`) is not an error.
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe) => {
                Ok(())
            }
            r => r.map_err(|e| CliError::Failure(e.to_string())),
        };
    };
    write_trajectory_csv(create(&out)?, &records).map_err(csv_error(&out))?;
    let mut outputs = vec![out.display().to_string()];
    if let Some(y) = neutral {
        let path = out.with_extension("neutral.csv");
        write_trajectory_csv(create(&path)?, &y).map_err(csv_error(&path))?;
        outputs.push(path.display().to_string());
    }
    let manifest = RunManifest {
        subcommand: "simulate".into(),
        config: json!({ "sim": cfg, "initial": "all individuals at class 0" }),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: args.seed,
        outputs,
        started,
        finished: now(),
    };
    write_manifest(&out.with_extension("manifest.json"), &manifest)
}

fn read_sweep_config(path: &Path) -> Result<SweepConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        CliError::Config(format!("{}: at `{at}`: {}", path.display(), e.into_inner()))
    })
}

fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let started = now();
    let cfg = read_sweep_config(&args.config)?;
    cfg.validate()?;
    let result = run_sweep(&cfg, args.threads)?;
    fs::create_dir_all(&args.out_dir).map_err(io_error(&args.out_dir))?;
    let csv_path = args.out_dir.join("sweep.csv");
    let svg_path = args.out_dir.join("sweep.svg");
    write_sweep_csv(create(&csv_path)?, &result).map_err(csv_error(&csv_path))?;
    fs::write(&svg_path, sweep_svg(&result)).map_err(io_error(&svg_path))?;
    let manifest = RunManifest {
        subcommand: "sweep".into(),
        config: serde_json::to_value(&cfg).expect("config serializes"),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.master_seed,
        outputs: vec![
            csv_path.display().to_string(),
            svg_path.display().to_string(),
        ],
        started,
        finished: now(),
    };
    write_manifest(&args.out_dir.join("sweep.manifest.json"), &manifest)?;
    print!("{}", key_value_text(&json!({ "grid": result.summaries })));
    let budget = result.budget_failures();
    if budget > 0 {
        return Err(CliError::Budget(format!(
            "{budget} of {} runs exhausted the event budget; their rows are left empty",
            result.rows.len()
        )));
    }
    if result.failures() > 0 {
        return Err(CliError::Failure(format!(
            "{} runs failed; their rows are left empty",
            result.failures()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictReport {
    pop_size: f64,
    ln_n: f64,
    mu: f64,
    q: f64,
    s: f64,
    /// Front lead over the mean.
    k: f64,
    /// Width of the bulk.
    b: f64,
    speed: f64,
    front_speed: Option<f64>,
    residual: f64,
    k_lambert: f64,
    k_asymptotic: Option<f64>,
}

fn predict(args: PredictArgs) -> Result<(), CliError> {
    if !(args.pop_size.is_finite() && args.pop_size > 1.0) {
        return Err(CliError::Config(format!(
            "population size must exceed 1, got {}",
            args.pop_size
        )));
    }
    let w = predict_wave(args.pop_size, args.mu, args.q, args.s)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let report = PredictReport {
        pop_size: args.pop_size,
        ln_n: args.pop_size.ln(),
        mu: args.mu,
        q: args.q,
        s: args.s,
        k: w.k_front,
        b: w.width,
        speed: w.speed,
        front_speed: w.front_speed,
        residual: w.residual,
        k_lambert: w.k_lambert,
        k_asymptotic: w.k_asymptotic,
    };
    let value = serde_json::to_value(&report).expect("report serializes");
    print_report(&value, args.json);
    Ok(())
}

fn print_report(value: &Value, as_json: bool) {
    if as_json {
        println!(
            "{}",
            serde_json::to_string_pretty(value).expect("serializable")
        );
    } else {
        print!("{}", key_value_text(value));
    }
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let suites: Vec<Suite> = match args.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let report = run_validation(&suites)?;
    if args.json {
        print_report(&serde_json::to_value(&report).expect("serializable"), true);
    } else {
        for c in &report.checks {
            println!(
                "{} [{}] {}: measured {:.6e}, limit {:.6e}; {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.measured,
                c.limit,
                c.detail
            );
        }
        println!(
            "{} of {} checks passed",
            report.checks.len() - report.failures(),
            report.checks.len()
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{} validation checks failed",
            report.failures()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Predict(a) => predict(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moranwave: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
