use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fncap_cli::{cmd_estimate, cmd_experiment, cmd_record, cmd_train, CliError, EstimateArgs};
use fncap_core::demo::demo_plan;
use fncap_core::serialize_test_plan;

#[derive(Parser)]
#[command(
    name = "fncap",
    version,
    about = "Function-capacity estimation on a simulated FaaS platform"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a ready-to-edit YAML plan for the built-in demo application.
    PlanTemplate {
        /// Write plan.yaml into this directory instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deploy the full application and record every inter-function exchange.
    Record {
        #[arg(long)]
        plan: PathBuf,
        /// Output directory shared by the whole pipeline run.
        #[arg(long)]
        out: PathBuf,
        /// Override the plan's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Load-test one function across the memory x concurrency grid.
    Experiment {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// The function to sandbox and measure.
        #[arg(long)]
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Run up to N grid cells on independent simulators in parallel.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Fit the five model families from recorded metrics.
    Train {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Train only this function (default: every function with metrics).
        #[arg(long)]
        target: Option<String>,
        /// Emit the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Estimate capacity at a configuration: ideal, model, and optionally
    /// a fresh measurement.
    Estimate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        target: String,
        /// Allocated memory in MiB (any value >= 128; off-grid values warn).
        #[arg(long)]
        memory: u32,
        #[arg(long)]
        concurrency: u32,
        /// Override the plan's SLO bound, in ms.
        #[arg(long)]
        slo_ms: Option<f64>,
        /// Model family to use (lr, plr, rr, rfr, dnn); default: best test R^2.
        #[arg(long)]
        family: Option<String>,
        /// Also run the SLO-bounded load search and print the measured value.
        #[arg(long)]
        measure: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::PlanTemplate { out } => {
            let yaml = serialize_test_plan(&demo_plan());
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join("plan.yaml");
                    std::fs::write(&path, &yaml)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{yaml}"),
            }
        }
        Command::Record { plan, out, seed } => {
            let outcome = cmd_record(&plan, &out, seed)?;
            println!(
                "recorded {} exchanges across {} callees -> {}",
                outcome.exchanges,
                outcome.callees,
                outcome.store_path.display()
            );
            for (caller, callee) in &outcome.unexercised {
                eprintln!("warning: edge {caller} -> {callee} never fired during recording");
            }
        }
        Command::Experiment { plan, out, target, seed, parallel } => {
            let outcome = cmd_experiment(&plan, &out, &target, seed, parallel)?;
            println!(
                "{} cells ok, {} failed; manifest -> {}",
                outcome.cells_ok,
                outcome.cells_failed,
                outcome.manifest_path.display()
            );
        }
        Command::Train { out, seed, target, json } => {
            let outcome = cmd_train(&out, seed, target.as_deref(), json)?;
            print!("{}", outcome.rendered);
            if !outcome.rendered.ends_with('\n') {
                println!();
            }
            for (function, reason) in &outcome.skipped {
                eprintln!("warning: {function}: {reason}");
            }
        }
        Command::Estimate {
            plan,
            out,
            target,
            memory,
            concurrency,
            slo_ms,
            family,
            measure,
            json,
            seed,
        } => {
            let outcome = cmd_estimate(&EstimateArgs {
                plan_path: &plan,
                out: &out,
                target: &target,
                memory_mib: memory,
                concurrency,
                slo_ms,
                family: family.as_deref(),
                measure,
                json,
                seed,
            })?;
            print!("{}", outcome.rendered);
            if !outcome.rendered.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
