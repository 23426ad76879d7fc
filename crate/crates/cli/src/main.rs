use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zzcm_cli::commands::{self, ExportPulseArgs, FindGammaArgs, SweepOverrides};
use zzcm_cli::{resolve_out_dir, CliError, RunConfig};
use zzcm_core::ScenarioKind;

#[derive(Parser)]
#[command(name = "zzcm", version, about = "ZZ-crosstalk mitigation sweeps and pulse tools")]
struct Cli {
    /// Output directory (overrides $ZZCM_OUT_DIR and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Base propagator resolution per modulation period.
    #[arg(long, global = true)]
    steps_per_period: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (scenario, k) of a config and write one CSV each.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Find the modulation ratio that zeroes the error cumulant.
    FindGamma {
        /// Pulse area, e.g. `pi/4`, `pi/2`, `0.785`.
        #[arg(long, default_value = "pi/4")]
        area: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 10.0)]
        hi: f64,
        /// Which zero to return, counting from 0.
        #[arg(long, default_value_t = 0)]
        root: usize,
        /// Also write the scanned curve to `<out>/error_cumulant.csv`.
        #[arg(long)]
        curve: bool,
    },
    /// Sample the primary drive waveform of a scenario.
    ExportPulse {
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Samples per unit time.
        #[arg(long)]
        rate: f64,
        /// Export the plain sin² baseline instead.
        #[arg(long)]
        baseline: bool,
        /// Normalize the modulated drive to a peak of `scale`.
        #[arg(long)]
        capped: Option<bool>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Print the built-in scenarios.
    ListScenarios,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Sweep { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = resolve_out_dir(cli.out, cfg.run.out_dir.as_deref());
            let overrides = SweepOverrides { workers: cli.workers, steps_per_period: cli.steps_per_period };
            commands::sweep(&cfg, &out, &overrides, &mut stdout)?;
        }
        Command::FindGamma { area, k, lo, hi, root, curve } => {
            let curve = curve.then(|| resolve_out_dir(cli.out, None).join("error_cumulant.csv"));
            let args = FindGammaArgs { area: commands::parse_area(&area)?, k, lo, hi, root, curve };
            commands::find_gamma(&args, &mut stdout)?;
        }
        Command::ExportPulse { scenario, k, rate, baseline, capped, scale } => {
            let out_dir = resolve_out_dir(cli.out, None);
            let args = ExportPulseArgs { scenario, k, rate, baseline, capped, scale, out_dir };
            commands::export_pulse(&args, &mut stdout)?;
        }
        Command::ListScenarios => commands::list_scenarios(&mut stdout)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
