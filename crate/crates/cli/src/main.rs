use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use likegame::io::plot::{self, PlotError};
use likegame::io::{self as lio, report, sweep, IoError};
use likegame::model::validate_config;
use likegame::par::workers_from_env;
use likegame::verify::{self, Hooks};
use likegame::run_game;

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_SWEEP: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_PLOT: u8 = 5;

#[derive(Parser)]
#[command(name = "likegame", version, about = "Simulate and analyse the game of like")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one game and write trace.jsonl, metrics.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's rng_seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the cross product of a sweep spec's parameters and seeds.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Check the built-in claims and print a pass/fail table.
    Verify,
    /// Draw one metric from a trace, metrics.csv or aggregate.csv as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn io_exit(e: &IoError) -> u8 {
    if e.is_parse() {
        EXIT_CONFIG
    } else {
        EXIT_IO
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn run(config_path: &Path, seed: Option<u64>, out: &Path) -> ExitCode {
    let mut config = match lio::load_config(config_path) {
        Ok(c) => c,
        Err(e) => return fail(io_exit(&e), e),
    };
    if let Some(seed) = seed {
        config.rng_seed = seed;
    }
    let report = validate_config(&config);
    for v in &report.violations {
        eprintln!("{v}");
    }
    if !report.is_runnable() {
        let names: Vec<&str> = report.fatal().map(|v| v.field.as_str()).collect();
        return fail(EXIT_CONFIG, format!("config violates {}", names.join(", ")));
    }
    let trace = match run_game(&config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match report::write_run(out, &trace) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_IO, e),
    }
}

fn run_sweep(spec: &Path) -> ExitCode {
    let report = match sweep::run_sweep(spec, workers_from_env()) {
        Ok(r) => r,
        Err(e) => return fail(io_exit(&e), e),
    };
    let failed: Vec<String> = report
        .outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().err().map(|e| format!("{}: {e}", o.plan.dir.display())))
        .collect();
    println!(
        "{} runs, {} failed; aggregate at {}",
        report.outcomes.len(),
        failed.len(),
        report.aggregate_path.display()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &failed {
            eprintln!("{f}");
        }
        fail(EXIT_SWEEP, format!("{} of {} runs failed", failed.len(), report.outcomes.len()))
    }
}

fn run_verify() -> ExitCode {
    let results = verify::run_claims(Hooks::default());
    print!("{}", verify::render_table(&results));
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        fail(EXIT_VERIFY, format!("claims failed: {}", failed.join(", ")))
    }
}

fn run_plot(input: &Path, metric: &str, out: &Path) -> ExitCode {
    match plot::plot(input, metric, out) {
        Ok(chart) => {
            println!("{} series written to {}", chart.series.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e @ (PlotError::UnknownMetric { .. } | PlotError::NoData(_))) => fail(EXIT_PLOT, e),
        Err(PlotError::Io(e)) if e.is_parse() => fail(EXIT_PLOT, e),
        Err(e) => fail(EXIT_IO, e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out } => run(&config, seed, &out),
        Command::Sweep { spec } => run_sweep(&spec),
        Command::Verify => run_verify(),
        Command::Plot { input, metric, out } => run_plot(&input, &metric, &out),
    }
}
