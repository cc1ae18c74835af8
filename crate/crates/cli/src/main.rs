use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quenched_cli::{run, validate_file, Severity};

#[derive(Parser)]
#[command(name = "quenched", version, about = "Run quenched sampled-sum experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a config, run it and write artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => {
            let diagnostics = validate_file(&config);
            for d in &diagnostics {
                println!("{d}");
            }
            if diagnostics.is_empty() {
                println!("ok");
                ExitCode::SUCCESS
            } else if diagnostics.iter().any(|d| d.severity == Severity::Error) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
        Command::Run { config, out, seed, threads } => {
            if let Some(t) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("cannot configure {t} threads: {e}");
                    return ExitCode::from(2);
                }
            }
            match run(&config, out.as_deref(), seed) {
                Ok(m) => {
                    println!(
                        "{} finished in {:.2}s; {} artifacts",
                        m.experiment,
                        m.wall_clock_seconds,
                        m.artifacts.len()
                    );
                    for a in &m.artifacts {
                        println!("  {} {}", a.sha256, a.file);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
