use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use spectral_shapes::experiments::{
    run_bounds_sweep, run_cap_search, run_fold_demo, run_hersch, run_machinery_suite, run_sharpness, run_solve,
    ExperimentConfig, Report,
};

#[derive(Parser)]
#[command(name = "spectral-shapes", version, about = "Isoperimetric eigenvalue bounds for Neumann and Steklov problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Key-value configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV, Markdown and SVG files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Lowest eigenvalues of every corpus domain.
    Solve,
    /// Audit every eigenvalue bound over the corpus.
    BoundsSweep,
    /// Degenerating families approaching the suprema.
    Sharpness,
    /// Renormalization points of the corpus measures.
    Hersch,
    /// Fold a measure along the configured cap.
    FoldDemo,
    /// Search for a cap making the rearranged measure multiple.
    CapSearch,
    /// Property suites for renormalization, folding, inertia and growth.
    Suite,
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    let report = match cli.command {
        Command::Solve => run_solve(&cfg)?,
        Command::BoundsSweep => run_bounds_sweep(&cfg)?.1,
        Command::Sharpness => run_sharpness(&cfg)?.1,
        Command::Hersch => run_hersch(&cfg)?,
        Command::FoldDemo => run_fold_demo(&cfg)?,
        Command::CapSearch => run_cap_search(&cfg)?,
        Command::Suite => run_machinery_suite(&cfg)?.1,
    };
    let out = cfg.out.unwrap_or_else(|| PathBuf::from("out"));
    report.write_to(&out).with_context(|| format!("writing {}", out.display()))?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.summary);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for f in &report.failures {
                    eprintln!("failure: {f}");
                }
                eprintln!(
                    "{} check(s) failed. The bounds are theorems, so this is a solver or discretization defect, not a counterexample.",
                    report.failures.len()
                );
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
