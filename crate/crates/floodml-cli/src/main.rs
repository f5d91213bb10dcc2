//! Command line front end for the flood-prediction pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use floodml::pipeline::{self, RunConfig, RunSummary};
use floodml::synth::{generate_synthetic, SynthSpec};

#[derive(Parser)]
#[command(name = "floodml", about = "Rainfall/flood binary-classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate synthetic rainfall and flood CSVs.
    Generate {
        /// TOML spec of the synthetic data; omit for the built-in default.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving rainfall.csv and flood.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Diff the metric tables of two runs (summary.csv files or run dirs).
    Compare {
        report_a: PathBuf,
        report_b: PathBuf,
    },
}

fn run(config_path: &Path) -> anyhow::Result<()> {
    let config = RunConfig::load(config_path)?;
    let report = pipeline::run_pipeline(&config)?;
    let written = pipeline::emit_run(&report, &config.output_dir)?;

    print!("{}", report.summary_csv());
    for note in &report.provenance.model_notes {
        println!("note: {note}");
    }
    if !report.provenance.coverage_warnings.is_empty() {
        println!(
            "warning: {} station-years had missing months (see provenance.txt)",
            report.provenance.coverage_warnings.len()
        );
    }
    println!(
        "wrote {} artifacts to {} in {:.2?}",
        written.len(),
        config.output_dir.display(),
        report.provenance.wall_clock
    );

    let failures: Vec<_> = report
        .entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().err().map(|msg| (e.kind, msg)))
        .collect();
    for (kind, message) in &failures {
        eprintln!("model {kind} failed: {message}");
    }
    Ok(())
}

fn generate(spec_path: Option<&PathBuf>, seed: u64, out: &Path) -> anyhow::Result<()> {
    let spec = match spec_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            SynthSpec::from_toml_str(&text)?
        }
        None => SynthSpec::default(),
    };
    let (rainfall, flood) = generate_synthetic(&spec, seed)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let rainfall_path = out.join("rainfall.csv");
    let flood_path = out.join("flood.csv");
    fs::write(&rainfall_path, rainfall)?;
    fs::write(&flood_path, flood)?;
    println!("wrote {} and {}", rainfall_path.display(), flood_path.display());
    Ok(())
}

fn compare(a: &Path, b: &Path) -> anyhow::Result<()> {
    let summary_a = RunSummary::load(a)?;
    let summary_b = RunSummary::load(b)?;
    print!("{}", pipeline::compare_summaries(&summary_a, &summary_b));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Generate { spec, seed, out } => generate(spec.as_ref(), *seed, out),
        Command::Compare { report_a, report_b } => compare(report_a, report_b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
