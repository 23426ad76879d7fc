use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use zzcm_core::cumulant::{find_gamma as core_find_gamma, gamma_scan, GammaRoot, SCAN_STEP};
use zzcm_core::pulse::write_waveform_csv;
use zzcm_core::scenario::{AmplitudeMode, Normalization};
use zzcm_core::{run_sweep, Scenario, ScenarioKind, ScenarioParams, Scheme, SweepRecord};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 7] = ["scenario", "k", "eta_ratio", "fidelity", "infidelity", "converged", "wall_ms"];

/// Above this `|η|τ` the averaging argument is doubtful; sweeps warn.
pub const DRIFT_WARNING: f64 = 0.1;

/// Overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct SweepOverrides {
    pub workers: Option<usize>,
    pub steps_per_period: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub scenario: String,
    pub k: usize,
    pub path: PathBuf,
    pub points: usize,
    pub worst_infidelity: f64,
    pub failed: usize,
}

pub fn csv_file_name(scenario: &Scenario) -> String {
    match scenario.scheme() {
        Scheme::Zzcm => format!("{}_k{}.csv", scenario.name(), scenario.reported_k()),
        Scheme::Dy => format!("{}.csv", scenario.name()),
    }
}

pub fn write_records(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scenario.clone(),
            r.k.to_string(),
            r.eta_ratio.to_string(),
            r.fidelity.to_string(),
            r.infidelity.to_string(),
            r.converged.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every job of the config, writing one CSV per `(scenario, k)` and a
/// summary table to `log`. All CSVs are written before a convergence failure
/// is reported.
pub fn sweep<W: Write>(
    config: &RunConfig,
    out_dir: &Path,
    overrides: &SweepOverrides,
    log: &mut W,
) -> Result<Vec<SweepSummary>> {
    let mut propagator = config.propagator.to_config();
    if let Some(n) = overrides.steps_per_period {
        propagator.steps_per_period = n;
    }
    propagator.validate()?;
    let grid = config.eta.points()?;
    let jobs = config.jobs()?;
    let workers = overrides.workers.unwrap_or(config.run.workers);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    fs::create_dir_all(out_dir)?;

    let max_ratio = grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut summaries = Vec::with_capacity(jobs.len());
    for job in jobs {
        let scenario = Scenario::new(job.kind, job.params)?;
        let drift = scenario.drift_parameter(max_ratio);
        if drift > DRIFT_WARNING {
            eprintln!(
                "warning: {} has |eta|*tau = {drift:.3} at the grid edge; slow-drift averaging may not hold",
                scenario.name()
            );
        }
        let mut records = pool.install(|| run_sweep(&scenario, &grid, &propagator))?;
        if !config.run.timing {
            records.iter_mut().for_each(|r| r.wall_ms = 0);
        }
        let path = out_dir.join(csv_file_name(&scenario));
        write_records(&path, &records)?;
        summaries.push(SweepSummary {
            scenario: scenario.name(),
            k: scenario.reported_k(),
            path,
            points: records.len(),
            worst_infidelity: records.iter().map(|r| r.infidelity).fold(0.0, f64::max),
            failed: records.iter().filter(|r| !r.converged).count(),
        });
    }

    let label = Normalization::from(config.eta.normalization).label();
    writeln!(log, "{:<10} {:>3} {:>6} {:>14} {:>6}  file  ({label})", "scenario", "k", "points", "max 1-F", "failed")?;
    for s in &summaries {
        writeln!(
            log,
            "{:<10} {:>3} {:>6} {:>14.6e} {:>6}  {}",
            s.scenario,
            s.k,
            s.points,
            s.worst_infidelity,
            s.failed,
            s.path.display()
        )?;
    }
    let failed: usize = summaries.iter().map(|s| s.failed).sum();
    if failed > 0 {
        let total = summaries.iter().map(|s| s.points).sum();
        return Err(CliError::NotConverged { failed, total });
    }
    Ok(summaries)
}

/// Parses a pulse area such as `pi/4`, `3pi/4`, `3*pi/2`, `pi` or `0.785`.
pub fn parse_area(text: &str) -> Result<f64> {
    let bad = || CliError::Usage(format!("cannot parse pulse area `{text}`"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let value = match s.find("pi") {
        None => s.parse::<f64>().map_err(|_| bad())?,
        Some(at) => {
            let coeff = s[..at].trim_end_matches('*');
            let coeff = if coeff.is_empty() { 1.0 } else { coeff.parse::<f64>().map_err(|_| bad())? };
            let rest = &s[at + 2..];
            let denom = match rest.strip_prefix('/') {
                Some(d) => d.parse::<f64>().map_err(|_| bad())?,
                None if rest.is_empty() => 1.0,
                None => return Err(bad()),
            };
            coeff * PI / denom
        }
    };
    if !(value > 0.0) || !value.is_finite() {
        return Err(CliError::Usage(format!("pulse area must be positive, got `{text}`")));
    }
    Ok(value)
}

#[derive(Clone, Debug)]
pub struct FindGammaArgs {
    pub area: f64,
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    pub root: usize,
    pub curve: Option<PathBuf>,
}

/// Locates the requested zero of the error cumulant, optionally writing the
/// scanned curve `gamma,ec_over_eta_tau`.
pub fn find_gamma<W: Write>(args: &FindGammaArgs, log: &mut W) -> Result<GammaRoot> {
    if let Some(path) = &args.curve {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(["gamma", "ec_over_eta_tau"])?;
        for (g, v) in gamma_scan(args.area, args.k, args.lo, args.hi, SCAN_STEP)? {
            w.write_record([g.to_string(), v.to_string()])?;
        }
        w.flush()?;
    }
    let root = core_find_gamma(args.area, args.k, args.lo, args.hi, args.root)?;
    writeln!(
        log,
        "gamma = {:.6}  (EC/(eta*tau) = {:.3e}, area = {:.6}, k = {})",
        root.gamma, root.residual, args.area, args.k
    )?;
    Ok(root)
}

#[derive(Clone, Debug)]
pub struct ExportPulseArgs {
    pub scenario: ScenarioKind,
    pub k: usize,
    pub rate: f64,
    pub baseline: bool,
    pub capped: Option<bool>,
    pub scale: f64,
    pub out_dir: PathBuf,
}

/// Samples the drive on Q(1,1) (or the coupling for the two-qubit baselines)
/// to `<scenario>[_k<k>]_pulse.csv`.
pub fn export_pulse<W: Write>(args: &ExportPulseArgs, log: &mut W) -> Result<PathBuf> {
    if !(args.rate > 0.0) || !args.rate.is_finite() {
        return Err(CliError::Usage(format!("sample rate must be positive, got {}", args.rate)));
    }
    let mut params = ScenarioParams::for_kind(args.scenario).with_k(args.k);
    params.scale = args.scale;
    if let Some(capped) = args.capped {
        params.amplitude = if capped { AmplitudeMode::Capped } else { AmplitudeMode::Uncapped };
    }
    if args.baseline {
        params.scheme = Scheme::Dy;
    }
    let scenario = Scenario::new(args.scenario, params)?;
    let (label, envelope, duration) = scenario.primary_waveform()?;
    let samples = envelope.sample(0.0, duration, args.rate)?;
    fs::create_dir_all(&args.out_dir)?;
    let stem = match scenario.scheme() {
        Scheme::Zzcm => format!("{}_k{}", scenario.name(), scenario.reported_k()),
        Scheme::Dy => scenario.name(),
    };
    let path = args.out_dir.join(format!("{stem}_pulse.csv"));
    write_waveform_csv(BufWriter::new(File::create(&path)?), &samples)?;
    writeln!(log, "{label}: {} samples over T = {duration:.6} -> {}", samples.len(), path.display())?;
    Ok(path)
}

pub fn list_scenarios<W: Write>(log: &mut W) -> Result<()> {
    writeln!(log, "{:<6} {:>6} {:<12} description", "name", "qubits", "eta axis")?;
    for kind in ScenarioKind::ALL {
        let s = Scenario::new(kind, ScenarioParams::for_kind(kind))?;
        writeln!(
            log,
            "{:<6} {:>6} {:<12} {}",
            kind.name(),
            s.register().len(),
            s.normalization().label(),
            kind.description()
        )?;
    }
    Ok(())
}
