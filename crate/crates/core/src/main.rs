use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wallstokes::cli::{self, Command};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Fields,
    Rankmap,
    Simulate,
    Plan,
    Verify,
}

/// Sphere swimmers near a no-slip wall.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files; nothing is written when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid and batch work.
    #[arg(long, env = "WALLSTOKES_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let cmd = match args.command {
        Cmd::Fields => Command::Fields,
        Cmd::Rankmap => Command::Rankmap,
        Cmd::Simulate => Command::Simulate,
        Cmd::Plan => Command::Plan,
        Cmd::Verify => Command::Verify,
    };
    let report = match cli::load_config(&args.config).and_then(|c| cli::run(cmd, &c)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", cli::error_json(&e));
            return ExitCode::from(2);
        }
    };
    print!("{}", report.stdout);
    if let Some(dir) = &args.out {
        let write = std::fs::create_dir_all(dir).and_then(|_| {
            for (name, body) in &report.files {
                std::fs::write(dir.join(name), body)?;
            }
            Ok(())
        });
        if let Err(e) = write {
            eprintln!("cannot write output to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}", report.failures_json());
        ExitCode::from(1)
    }
}
