use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use willmore_core::cli::{self, parse_config};

#[derive(Parser)]
#[command(name = "willmore", version, about = "Willmore flow of normal graphs over a sphere or torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow and write series.csv, mesh snapshots and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the one in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy and curvature report of the initial surface.
    Energy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Short flow followed by the coefficient-decay probe; writes probe.json.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("WILLMORE_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("WILLMORE_THREADS must be a positive integer, got {value:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(cli::EXIT_CONFIG as u8);
    }
    let (config, out) = match &args.command {
        Command::Run { config, out } | Command::Energy { config, out } | Command::Probe { config, out } => (config, out.as_deref()),
    };
    let cfg = match parse_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                willmore_core::Error::Io(_) => cli::EXIT_IO,
                _ => cli::EXIT_CONFIG,
            };
            return ExitCode::from(code as u8);
        }
    };
    let code = match args.command {
        Command::Run { .. } => match cli::cmd_run(&cfg, out) {
            Ok((event, report)) => {
                println!("{} at t = {} after {} steps, W = {}", report.terminal, report.t_final, report.steps, report.w_final);
                if !event.message.is_empty() {
                    println!("{}", event.message);
                }
                cli::exit_code_for_event(event.kind)
            }
            Err(e) => {
                eprintln!("error: {e}");
                cli::exit_code_for_error(&e)
            }
        },
        Command::Energy { .. } => match cli::cmd_energy(&cfg, out) {
            Ok(s) => {
                println!("W = {} area = {} gb_defect = {:e} el_residual_sup = {:e}", s.willmore, s.area, s.gb_defect, s.el_residual_sup);
                cli::EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                cli::exit_code_for_error(&e)
            }
        },
        Command::Probe { .. } => match cli::cmd_probe(&cfg, out) {
            Ok(s) => {
                println!("decay ratios {:?}, decays: {}", s.decay_ratios, s.decays);
                cli::EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                cli::exit_code_for_error(&e)
            }
        },
    };
    ExitCode::from(code as u8)
}
