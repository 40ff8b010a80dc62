use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dstm_cli::commands::{
    cmd_adaptive, cmd_correlation, cmd_pep_bound, cmd_ser_sweep, CliError, CommandOutput,
};
use dstm_cli::config::{load_config, RunConfig};
use dstm_cli::plot::plot_script;

/// Link-level simulator for differential space-time modulation over
/// spatially-temporally correlated channels.
#[derive(Parser)]
#[command(name = "dstm-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key=value configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named sweep preset (ser-sweep only): fig5|fig7|fig8|fig9|fig10.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Base seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the CSV here (plus `<out>.manifest`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (requires --out).
    #[arg(long, global = true)]
    emit_plot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation structure (case, lag, coefficients) versus speed.
    Correlation,
    /// Analytic PEP bound and error floor versus SNR.
    PepBound,
    /// Monte Carlo symbol-error-rate sweep.
    SerSweep,
    /// Block-length adaptation table and velocity threshold.
    Adaptive,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut rc = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        rc.seed = seed;
    }
    if let Some(w) = &rc.coherence_warning {
        eprintln!("warning: {w}");
    }

    let out: CommandOutput = match cli.command {
        Command::Correlation => cmd_correlation(&rc)?,
        Command::PepBound => cmd_pep_bound(&rc)?,
        Command::SerSweep => cmd_ser_sweep(&rc, cli.preset.as_deref())?,
        Command::Adaptive => cmd_adaptive(&rc)?,
    };

    match &cli.out {
        Some(path) => {
            let write = |p: &PathBuf, text: &str| {
                std::fs::write(p, text).map_err(|source| CliError::Write {
                    path: p.display().to_string(),
                    source,
                })
            };
            write(path, &out.csv)?;
            let mut manifest_path = path.clone();
            manifest_path.as_mut_os_string().push(".manifest");
            write(&manifest_path, &out.manifest)?;
            if cli.emit_plot {
                let (script, series) = plot_script(&out.csv, &path.display().to_string())?;
                if series == 0 {
                    eprintln!("warning: no data rows; plot script has no series");
                }
                let mut plot_path = path.clone();
                plot_path.as_mut_os_string().push(".gnuplot");
                write(&plot_path, &script)?;
            }
        }
        None => {
            print!("{}", out.csv);
            eprint!("{}", out.manifest);
            if cli.emit_plot {
                eprintln!("warning: --emit-plot requires --out; skipped");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
