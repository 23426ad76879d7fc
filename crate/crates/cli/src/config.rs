//! Versioned TOML run configuration.
//!
//! ```toml
//! version = 1
//!
//! [run]
//! scenarios = ["s1"]
//! k = [1, 2, 3, 4, 10]
//! baseline = true        # also run the plain sin² baseline once per scenario
//! workers = 0            # 0 = one per core
//! timing = false         # record wall_ms; off keeps outputs byte-identical
//! out_dir = "out/fig1b"
//!
//! [eta]
//! min = -0.5
//! max = 0.5
//! count = 21
//! normalization = "drive-amplitude"   # | "amplitude-cap" | "coupling"
//!
//! [propagator]
//! steps_per_period = 256
//! tolerance = 1e-8
//! integrator = "magnus4"              # | "midpoint"
//!
//! [scenario]
//! scale = 1.0                         # Ω₀, Ω_m or J₀
//! s3_drive = "frame-target"           # | "literal" | "omitted"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use zzcm_core::scenario::{linspace, AmplitudeMode, Normalization, SingleQubitDriveMode};
use zzcm_core::{Integrator, PropagatorConfig, ScenarioKind, ScenarioParams, Scheme};

use crate::error::{CliError, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub run: RunSection,
    pub eta: EtaGrid,
    #[serde(default)]
    pub propagator: PropagatorSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scenarios: Vec<String>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default)]
    pub baseline: bool,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub timing: bool,
    pub out_dir: Option<PathBuf>,
}

fn default_k() -> Vec<usize> {
    vec![4]
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationName {
    DriveAmplitude,
    AmplitudeCap,
    Coupling,
}

impl From<NormalizationName> for Normalization {
    fn from(n: NormalizationName) -> Self {
        match n {
            NormalizationName::DriveAmplitude => Normalization::DriveAmplitude,
            NormalizationName::AmplitudeCap => Normalization::AmplitudeCap,
            NormalizationName::Coupling => Normalization::Coupling,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub normalization: NormalizationName,
}

impl EtaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(CliError::Usage("eta.count must be at least 1".into()));
        }
        if !(self.min <= self.max) {
            return Err(CliError::Usage(format!("eta.min ({}) exceeds eta.max ({})", self.min, self.max)));
        }
        Ok(linspace(self.min, self.max, self.count)?)
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorName {
    Midpoint,
    #[default]
    Magnus4,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorSection {
    pub steps_per_period: usize,
    pub tolerance: f64,
    pub integrator: IntegratorName,
}

impl Default for PropagatorSection {
    fn default() -> Self {
        let d = PropagatorConfig::default();
        PropagatorSection {
            steps_per_period: d.steps_per_period,
            tolerance: d.tolerance,
            integrator: IntegratorName::Magnus4,
        }
    }
}

impl PropagatorSection {
    pub fn to_config(&self) -> PropagatorConfig {
        PropagatorConfig {
            steps_per_period: self.steps_per_period,
            tolerance: self.tolerance,
            integrator: match self.integrator {
                IntegratorName::Midpoint => Integrator::Midpoint,
                IntegratorName::Magnus4 => Integrator::Magnus4,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum S3DriveName {
    #[default]
    FrameTarget,
    Literal,
    Omitted,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub scale: f64,
    pub gamma: Option<f64>,
    pub s3_drive: S3DriveName,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection { scale: 1.0, gamma: None, s3_drive: S3DriveName::FrameTarget }
    }
}

/// One `(scenario, scheme, k)` combination to sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Job {
    pub kind: ScenarioKind,
    pub params: ScenarioParams,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.run.scenarios.is_empty() {
            return Err(CliError::Usage("run.scenarios is empty".into()));
        }
        if self.run.k.is_empty() || self.run.k.contains(&0) {
            return Err(CliError::Usage("run.k must list positive repetition counts".into()));
        }
        self.eta.points()?;
        self.propagator.to_config().validate()?;
        for kind in self.kinds()? {
            self.amplitude_for(kind)?;
        }
        Ok(())
    }

    pub fn kinds(&self) -> Result<Vec<ScenarioKind>> {
        self.run
            .scenarios
            .iter()
            .map(|s| s.parse().map_err(|_| CliError::Usage(format!("unknown scenario `{s}`"))))
            .collect()
    }

    /// The grid normalization fixes the amplitude convention.
    fn amplitude_for(&self, kind: ScenarioKind) -> Result<AmplitudeMode> {
        match (self.eta.normalization, kind.is_two_qubit()) {
            (NormalizationName::Coupling, true) => Ok(AmplitudeMode::Capped),
            (NormalizationName::DriveAmplitude, false) => Ok(AmplitudeMode::Uncapped),
            (NormalizationName::AmplitudeCap, false) => Ok(AmplitudeMode::Capped),
            (n, _) => Err(CliError::Usage(format!(
                "normalization `{}` does not apply to scenario {kind}",
                Normalization::from(n).label()
            ))),
        }
    }

    /// Jobs in output order: every k for each scenario, then its baseline.
    pub fn jobs(&self) -> Result<Vec<Job>> {
        let mut jobs = Vec::new();
        for kind in self.kinds()? {
            let base = ScenarioParams {
                amplitude: self.amplitude_for(kind)?,
                scale: self.scenario.scale,
                gamma: self.scenario.gamma,
                s3_drive: match self.scenario.s3_drive {
                    S3DriveName::FrameTarget => SingleQubitDriveMode::FrameTarget,
                    S3DriveName::Literal => SingleQubitDriveMode::Literal,
                    S3DriveName::Omitted => SingleQubitDriveMode::Omitted,
                },
                ..ScenarioParams::for_kind(kind)
            };
            for &k in &self.run.k {
                jobs.push(Job { kind, params: base.with_k(k) });
            }
            if self.run.baseline {
                jobs.push(Job { kind, params: base.with_scheme(Scheme::Dy) });
            }
        }
        Ok(jobs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        version = 1
        [run]
        scenarios = ["s1"]
        k = [1, 4]
        baseline = true
        [eta]
        min = -0.5
        max = 0.5
        count = 3
        normalization = "drive-amplitude"
    "#;

    #[test]
    fn minimal_config_expands_to_jobs() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        let jobs = c.jobs().unwrap();
        assert_eq!(jobs.len(), 3);
        assert_eq!(jobs[0].params.k, 1);
        assert_eq!(jobs[2].params.scheme, Scheme::Dy);
        assert_eq!(jobs[1].params.amplitude, AmplitudeMode::Uncapped);
        assert_eq!(c.propagator.to_config(), PropagatorConfig::default());
        assert_eq!(c.eta.points().unwrap(), vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn rejects_bad_configs() {
        for (from, to) in [
            ("version = 1", "version = 2"),
            (r#"scenarios = ["s1"]"#, "scenarios = []"),
            (r#"scenarios = ["s1"]"#, r#"scenarios = ["s9"]"#),
            ("count = 3", "count = 0"),
            ("min = -0.5", "min = 0.7"),
            (r#""drive-amplitude""#, r#""coupling""#),
            ("k = [1, 4]", "k = [0]"),
            ("baseline = true", "baseline = true\nbogus = 1"),
        ] {
            let text = MINIMAL.replace(from, to);
            assert!(matches!(RunConfig::parse(&text), Err(CliError::Usage(_))), "{to}");
        }
    }

    #[test]
    fn capped_normalization_caps_amplitude() {
        let text = MINIMAL.replace(r#""drive-amplitude""#, r#""amplitude-cap""#);
        let jobs = RunConfig::parse(&text).unwrap().jobs().unwrap();
        assert!(jobs.iter().all(|j| j.params.amplitude == AmplitudeMode::Capped));
    }
}
