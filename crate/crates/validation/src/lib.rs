//! Helpers for running the checked-in figure presets from the acceptance suite.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use zzcm_cli::commands::{sweep, SweepOverrides};
use zzcm_cli::{Result, RunConfig};

pub const PRESETS: [&str; 6] = ["fig1b", "figs2", "fig2b", "figs3", "fig3b", "figs4"];

/// One CSV row: `(eta_ratio, infidelity, converged)`.
pub type Row = (f64, f64, bool);

/// Scenario name → k → rows, in file order.
pub type SweepTable = BTreeMap<String, BTreeMap<usize, Vec<Row>>>;

pub fn preset_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

pub fn load_preset(name: &str) -> Result<RunConfig> {
    RunConfig::load(&preset_path(name))
}

/// Runs a preset through the sweep command into a temporary directory and
/// reads back every CSV it wrote.
pub fn run_preset(name: &str) -> Result<SweepTable> {
    let dir = tempfile::TempDir::new()?;
    let summaries = sweep(&load_preset(name)?, dir.path(), &SweepOverrides::default(), &mut std::io::sink())?;
    let mut table = SweepTable::new();
    for s in summaries {
        let mut reader = csv::Reader::from_path(&s.path)?;
        let mut rows = Vec::new();
        for record in reader.records() {
            let r = record?;
            let num = |i: usize| r[i].parse::<f64>().map_err(|e| zzcm_cli::CliError::Usage(e.to_string()));
            rows.push((num(2)?, num(4)?, &r[5] == "true"));
        }
        table.entry(s.scenario).or_default().insert(s.k, rows);
    }
    Ok(table)
}
