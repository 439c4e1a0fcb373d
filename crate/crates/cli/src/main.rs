use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use kornlab_core::config::ExperimentConfig;
use kornlab_core::report::{run, Format, RunReport};
use kornlab_core::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "kornlab", version, about = "Weighted Korn and Hardy inequality experiments on thin rectangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
    /// Run with dense eigensolvers throughout.
    Oracle { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn load(cli: &Cli, path: &PathBuf) -> anyhow::Result<Result<ExperimentConfig, Vec<String>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match ExperimentConfig::parse(&text) {
        Ok(mut c) => {
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            if let Some(o) = &cli.out {
                c.output = o.display().to_string();
            }
            Ok(c)
        }
        Err(Error::Config(errors)) => Err(errors),
        Err(e) => Err(vec![e.to_string()]),
    })
}

fn summarize(r: &RunReport) {
    for row in &r.rows {
        let h = row.h.map(|h| format!(" h={h}")).unwrap_or_default();
        println!("{}{h}: {}", row.label, row.value);
    }
    if let Some(f) = &r.fit {
        println!("fit: C={} alpha={} R^2={}", f.c, f.alpha, f.r_squared);
    }
    for f in &r.failures {
        eprintln!("failed {} h={:?}: {}", f.label, f.h, f.message);
    }
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let (path, dense) = match &cli.command {
        Command::Run { config } => (config, false),
        Command::Oracle { config } => (config, true),
        Command::Validate { config } => (config, false),
    };
    let mut cfg = match load(&cli, path)? {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
    };
    if let Command::Validate { .. } = cli.command {
        print!("{}", cfg.emit());
        return Ok(ExitCode::SUCCESS);
    }
    cfg.solver.dense |= dense;
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(Error::Config(errors)) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
        Err(e) => return Err(e.into()),
    };
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let written = report.emit(std::path::Path::new(&cfg.output), format)?;
    summarize(&report);
    println!("report: {}", written.display());
    Ok(if report.succeeded() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_PARTIAL) })
}
