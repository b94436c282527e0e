use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pat_cli::config::ExperimentConfig;
use pat_cli::run::{run_all, MANIFEST_FILE};
use pat_cli::{diag, CliError};

#[derive(Parser)]
#[command(name = "pat", version, about = "Photoacoustic reconstruction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline of a config
    Run { config: PathBuf },
    /// Run the pipeline once per relaxation time
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        tau1: Vec<f64>,
        config: PathBuf,
    },
    /// Diagnostics
    Diag {
        #[command(subcommand)]
        what: DiagCommand,
    },
}

#[derive(Subcommand)]
enum DiagCommand {
    /// Spectral symbols and zero shells of the operator
    Symbols { config: PathBuf },
}

fn threads() -> usize {
    std::env::var("PAT_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let cfg = ExperimentConfig::load(path)?;
    if cfg.full_scale {
        eprintln!(
            "warning: full-scale grid {n}x{n}; expect long run times and large outputs",
            n = cfg.grid.n
        );
    }
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig) -> i32 {
    let mut code = 0;
    for r in run_all(cfg, threads()) {
        match r {
            Ok(s) => {
                let note = if s.blow_up { " (finite-difference blow-up)" } else { "" };
                println!("{}{note}", s.dir.join(MANIFEST_FILE).display());
            }
            Err(f) => {
                eprint!("{}", f.record());
                code = code.max(f.error.exit_code());
            }
        }
    }
    code
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config } => Ok(execute(&load(&config)?)),
        Command::Sweep { tau1, config } => {
            let mut cfg = load(&config)?;
            for &t in &tau1 {
                cfg.medium.with_tau1(t)?;
            }
            // Always one subdirectory per value, even for a single entry.
            if tau1.len() == 1 {
                cfg.outputs.dir = pat_cli::run::run_dir(&cfg.outputs.dir, tau1[0], true);
            }
            cfg.tau1s = tau1;
            cfg.medium = cfg.medium.with_tau1(cfg.tau1s[0])?;
            Ok(execute(&cfg))
        }
        Command::Diag {
            what: DiagCommand::Symbols { config },
        } => {
            let cfg = load(&config)?;
            let summary = diag::symbols(&cfg, &cfg.medium)?;
            print!("{}", summary.render());
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = dispatch(cli).unwrap_or_else(|e| {
        eprintln!("[error]\nkind = {}\nstage = setup\nexit_code = {}\nmessage = {e}", e.kind(), e.exit_code());
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
