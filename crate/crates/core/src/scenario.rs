//! The shipped experiments: qubit boxes, ZZ edge sets, modulated and plain
//! (dynamical) schedules, and ideal targets.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rayon::prelude::*;

use crate::cumulant::{find_gamma, peak_amplitude, select_k};
use crate::error::{Error, Result};
use crate::frame::FrameGenerator;
use crate::hamiltonian::{Hamiltonian, HamiltonianSum};
use crate::lattice::{build_drive, build_xy, build_zz, DriveTerm, TimeDependentHamiltonian, XyEdge, ZzEdge};
use crate::operator::{Axis, DenseOperator, QubitRegister, Site};
use crate::propagator::{fidelity_report, ideal_gate, FidelityReport, GateLabel, PropagatorConfig, Schedule, Step};
use crate::pulse::{Envelope, PhaseProfile};

const fn q(row: i32, col: i32) -> Site {
    Site::new(row, col)
}

/// Which experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    /// Isolated `σˣ/2` on one qubit with four spectators.
    S1,
    /// Isolated `σˣ` on one qubit with four spectators.
    S1b,
    /// Parallel `σˣ ⊗ σʸ` on diagonal next-nearest neighbours.
    S2,
    /// Parallel `σˣ ⊗ σʸ` on nearest neighbours.
    S2nn,
    /// SWAP with simultaneous `σˣ`, `σʸ` and identity on spectators, two steps.
    S3,
    /// Two parallel SWAP gates, two steps.
    S4,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] =
        [ScenarioKind::S1, ScenarioKind::S1b, ScenarioKind::S2, ScenarioKind::S2nn, ScenarioKind::S3, ScenarioKind::S4];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::S1 => "s1",
            ScenarioKind::S1b => "s1b",
            ScenarioKind::S2 => "s2",
            ScenarioKind::S2nn => "s2nn",
            ScenarioKind::S3 => "s3",
            ScenarioKind::S4 => "s4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::S1 => "isolated sigma_x/2 on Q(1,1), 4 spectators, 5 qubits",
            ScenarioKind::S1b => "isolated sigma_x on Q(1,1), 4 spectators, 5 qubits",
            ScenarioKind::S2 => "parallel sigma_x on Q(1,1) and sigma_y on Q(2,2), 8 qubits",
            ScenarioKind::S2nn => "parallel sigma_x on Q(1,1) and sigma_y on Q(1,2), 8 qubits",
            ScenarioKind::S3 => "SWAP on Q(1,1)-Q(1,2) with sigma_x on Q(0,2), sigma_y on Q(1,3), 8 qubits",
            ScenarioKind::S4 => "parallel SWAP on Q(1,1)-Q(1,2) and Q(2,1)-Q(2,2), 8 qubits",
        }
    }

    /// Pulse area of the gate drive (per step for two-qubit scenarios).
    pub fn area(self) -> f64 {
        match self {
            ScenarioKind::S1 => FRAC_PI_4,
            _ => FRAC_PI_2,
        }
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, ScenarioKind::S3 | ScenarioKind::S4)
    }

    pub fn default_amplitude(self) -> AmplitudeMode {
        match self {
            ScenarioKind::S1 => AmplitudeMode::Uncapped,
            _ => AmplitudeMode::Capped,
        }
    }

    fn register_labels(self) -> Vec<Site> {
        match self {
            ScenarioKind::S1 | ScenarioKind::S1b => vec![q(1, 1), q(0, 1), q(2, 1), q(1, 0), q(1, 2)],
            ScenarioKind::S2 => vec![q(1, 1), q(2, 2), q(0, 1), q(1, 0), q(1, 2), q(2, 1), q(2, 3), q(3, 2)],
            ScenarioKind::S2nn | ScenarioKind::S3 => {
                vec![q(1, 1), q(1, 2), q(0, 1), q(2, 1), q(1, 0), q(0, 2), q(2, 2), q(1, 3)]
            }
            ScenarioKind::S4 => vec![q(0, 1), q(0, 2), q(1, 1), q(1, 2), q(2, 1), q(2, 2), q(3, 1), q(3, 2)],
        }
    }

    /// Unit-strength ZZ pairs inside the box.
    fn zz_pairs(self) -> Vec<(Site, Site)> {
        let star = |c: Site, others: &[Site]| others.iter().map(|o| (c, *o)).collect::<Vec<_>>();
        match self {
            ScenarioKind::S1 | ScenarioKind::S1b => star(q(1, 1), &[q(0, 1), q(2, 1), q(1, 0), q(1, 2)]),
            ScenarioKind::S2 => {
                let mut e = star(q(1, 1), &[q(0, 1), q(2, 1), q(1, 0), q(1, 2)]);
                e.extend(star(q(2, 2), &[q(1, 2), q(3, 2), q(2, 1), q(2, 3)]));
                e
            }
            ScenarioKind::S2nn | ScenarioKind::S3 => {
                let mut e = star(q(1, 1), &[q(0, 1), q(2, 1), q(1, 0), q(1, 2)]);
                e.extend(star(q(1, 2), &[q(0, 2), q(2, 2), q(1, 3)]));
                e
            }
            ScenarioKind::S4 => {
                let mut e = star(q(1, 1), &[q(0, 1), q(2, 1), q(1, 2)]);
                e.extend(star(q(1, 2), &[q(0, 2), q(2, 2)]));
                e.extend(star(q(2, 1), &[q(2, 2), q(3, 1)]));
                e.push((q(2, 2), q(3, 2)));
                e
            }
        }
    }

    fn ideal_spec(self, s3_drive: SingleQubitDriveMode) -> Vec<(Vec<Site>, GateLabel)> {
        match self {
            ScenarioKind::S3 if s3_drive == SingleQubitDriveMode::Omitted => {
                vec![(vec![q(1, 1), q(1, 2)], GateLabel::Swap)]
            }
            ScenarioKind::S1 => vec![(vec![q(1, 1)], GateLabel::HalfX)],
            ScenarioKind::S1b => vec![(vec![q(1, 1)], GateLabel::X)],
            ScenarioKind::S2 => vec![(vec![q(1, 1)], GateLabel::X), (vec![q(2, 2)], GateLabel::Y)],
            ScenarioKind::S2nn => vec![(vec![q(1, 1)], GateLabel::X), (vec![q(1, 2)], GateLabel::Y)],
            ScenarioKind::S3 => vec![
                (vec![q(1, 1), q(1, 2)], GateLabel::Swap),
                (vec![q(0, 2)], GateLabel::X),
                (vec![q(1, 3)], GateLabel::Y),
            ],
            ScenarioKind::S4 => {
                vec![(vec![q(1, 1), q(1, 2)], GateLabel::Swap), (vec![q(2, 1), q(2, 2)], GateLabel::Swap)]
            }
        }
    }

    /// Sites carrying the frame rotation.
    fn frame_sites(self) -> Vec<Site> {
        match self {
            ScenarioKind::S1 | ScenarioKind::S1b => vec![q(1, 1)],
            ScenarioKind::S2 => vec![q(1, 1), q(2, 2)],
            ScenarioKind::S2nn | ScenarioKind::S3 => vec![q(0, 2), q(1, 1), q(1, 3), q(2, 2)],
            ScenarioKind::S4 => vec![q(0, 2), q(1, 1), q(2, 2), q(3, 1)],
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == lower || (lower == "s2-nn" && *k == ScenarioKind::S2nn))
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Modulated frame protocol or the plain sin² (dynamical) baseline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    #[default]
    Zzcm,
    Dy,
}

/// How the single-qubit drive amplitude is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AmplitudeMode {
    /// `Ω₀ = scale`; the modulated peak grows with k.
    Uncapped,
    /// The modulated peak equals `scale` (= Ω_m).
    Capped,
}

/// What `η` is measured against in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `η / Ω₀`.
    DriveAmplitude,
    /// `η / Ω_m`.
    AmplitudeCap,
    /// `η / J₀`.
    Coupling,
}

impl Normalization {
    pub fn label(self) -> &'static str {
        match self {
            Normalization::DriveAmplitude => "eta/Omega0",
            Normalization::AmplitudeCap => "eta/Omega_m",
            Normalization::Coupling => "eta/J0",
        }
    }
}

/// Realization of the extra single-qubit gates in S3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SingleQubitDriveMode {
    /// `(J/2)(σˣ + σʸ)` is the frame-side target; the lab drive follows the frame.
    #[default]
    FrameTarget,
    /// `(J/2)(σˣ + σʸ)` is added unchanged to the lab Hamiltonian in both steps.
    Literal,
    /// No single-qubit gates; the target is the SWAP alone.
    Omitted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    pub scheme: Scheme,
    pub k: usize,
    pub amplitude: AmplitudeMode,
    /// `Ω₀`, `Ω_m` or `J₀` depending on the normalization.
    pub scale: f64,
    /// Overrides the optimal modulation ratio.
    pub gamma: Option<f64>,
    pub s3_drive: SingleQubitDriveMode,
}

impl ScenarioParams {
    pub fn for_kind(kind: ScenarioKind) -> Self {
        ScenarioParams {
            scheme: Scheme::Zzcm,
            k: 4,
            amplitude: kind.default_amplitude(),
            scale: 1.0,
            gamma: None,
            s3_drive: SingleQubitDriveMode::default(),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_amplitude(mut self, amplitude: AmplitudeMode) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// First zero of the error cumulant for a pulse area; independent of k.
pub fn optimal_gamma(area: f64) -> Result<f64> {
    static QUARTER: OnceLock<f64> = OnceLock::new();
    static HALF: OnceLock<f64> = OnceLock::new();
    let compute = || find_gamma(area, 1, 0.0, 10.0, 0).map(|r| r.gamma);
    let cell = if area == FRAC_PI_4 {
        &QUARTER
    } else if area == FRAC_PI_2 {
        &HALF
    } else {
        return compute();
    };
    if let Some(g) = cell.get() {
        return Ok(*g);
    }
    let g = compute()?;
    Ok(*cell.get_or_init(|| g))
}

/// A fully specified experiment, parameterized by the crosstalk strength.
#[derive(Clone, Debug)]
pub struct Scenario {
    kind: ScenarioKind,
    params: ScenarioParams,
    register: Arc<QubitRegister>,
    gamma: f64,
    /// `Ω₀` (single-qubit) or `J₀` (two-qubit) actually applied.
    amplitude: f64,
    /// Duration of one step.
    step_time: f64,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, params: ScenarioParams) -> Result<Self> {
        if params.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(params.scale > 0.0) || !params.scale.is_finite() {
            return Err(Error::InvalidParameter(format!("amplitude scale must be positive, got {}", params.scale)));
        }
        let register = QubitRegister::new(kind.register_labels())?;
        let gamma = match params.gamma {
            Some(g) => g,
            None => optimal_gamma(kind.area())?,
        };
        let amplitude = match (kind.is_two_qubit(), params.scheme, params.amplitude) {
            (true, _, _) => params.scale,
            (false, Scheme::Zzcm, AmplitudeMode::Capped) => params.scale / peak_amplitude(params.k, gamma)?,
            (false, _, _) => params.scale,
        };
        let step_time = if kind.is_two_qubit() { PI / amplitude } else { 2.0 * kind.area() / amplitude };
        Ok(Scenario { kind, params, register, gamma, amplitude, step_time })
    }

    pub fn by_name(name: &str, params: ScenarioParams) -> Result<Self> {
        Scenario::new(name.parse()?, params)
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn scheme(&self) -> Scheme {
        self.params.scheme
    }

    /// `"s1"`, `"s1-dy"`, ….
    pub fn name(&self) -> String {
        match self.params.scheme {
            Scheme::Zzcm => self.kind.name().to_string(),
            Scheme::Dy => format!("{}-dy", self.kind.name()),
        }
    }

    /// k as reported in sweep output; 0 for the baseline, which has none.
    pub fn reported_k(&self) -> usize {
        match self.params.scheme {
            Scheme::Zzcm => self.params.k,
            Scheme::Dy => 0,
        }
    }

    pub fn register(&self) -> &Arc<QubitRegister> {
        &self.register
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Peak of the sin² part of the gate drive, or `J₀`.
    pub fn base_amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn step_time(&self) -> f64 {
        self.step_time
    }

    pub fn step_count(&self) -> usize {
        if self.kind.is_two_qubit() && self.params.scheme == Scheme::Zzcm {
            2
        } else {
            1
        }
    }

    pub fn total_time(&self) -> f64 {
        self.step_time * self.step_count() as f64
    }

    /// Modulation period `τ = T/k`.
    pub fn period(&self) -> f64 {
        self.step_time / self.params.k as f64
    }

    /// Modulation amplitude `ω = γ k Ω₀` (or `γ k J₀`).
    pub fn omega(&self) -> f64 {
        self.gamma * self.params.k as f64 * self.amplitude
    }

    pub fn normalization(&self) -> Normalization {
        if self.kind.is_two_qubit() {
            Normalization::Coupling
        } else {
            match self.params.amplitude {
                AmplitudeMode::Uncapped => Normalization::DriveAmplitude,
                AmplitudeMode::Capped => Normalization::AmplitudeCap,
            }
        }
    }

    /// Crosstalk strength for a normalized ratio.
    pub fn eta(&self, ratio: f64) -> f64 {
        ratio * self.params.scale
    }

    /// `|η|τ`; the averaging argument needs this to be small.
    pub fn drift_parameter(&self, ratio: f64) -> f64 {
        (self.eta(ratio) * self.period()).abs()
    }

    pub fn zz_pairs(&self) -> Vec<(Site, Site)> {
        self.kind.zz_pairs()
    }

    pub fn zz_hamiltonian(&self, eta: f64) -> Result<TimeDependentHamiltonian> {
        let edges =
            self.kind.zz_pairs().into_iter().map(|(a, b)| ZzEdge::new(a, b, eta)).collect::<Result<Vec<_>>>()?;
        build_zz(&self.register, &edges)
    }

    pub fn ideal(&self) -> Result<DenseOperator> {
        ideal_gate(&self.register, &self.kind.ideal_spec(self.params.s3_drive))
    }

    fn sin2(&self, amplitude: f64) -> Result<Envelope> {
        Envelope::sin_squared(amplitude, self.step_time)
    }

    fn modulation(&self) -> Result<Envelope> {
        Envelope::modulation(self.omega(), self.period())
    }

    /// Frame generators, one per step; empty for the baseline.
    pub fn frames(&self) -> Result<Vec<Arc<FrameGenerator>>> {
        if self.params.scheme == Scheme::Dy {
            return Ok(Vec::new());
        }
        let profile = PhaseProfile::new(self.omega(), self.period())?;
        let axes: Vec<Vec<Axis>> = match self.kind {
            ScenarioKind::S1 | ScenarioKind::S1b => vec![vec![Axis::X]],
            ScenarioKind::S2 => vec![vec![Axis::X, Axis::Y]],
            ScenarioKind::S2nn => vec![vec![Axis::X; 4]],
            ScenarioKind::S3 | ScenarioKind::S4 => vec![vec![Axis::X; 4], vec![Axis::Y; 4]],
        };
        let sites = self.kind.frame_sites();
        axes.into_iter()
            .map(|ax| {
                let factors: Vec<(Site, Axis)> = sites.iter().copied().zip(ax).collect();
                FrameGenerator::site_wise(&self.register, &factors, profile, self.params.k).map(Arc::new)
            })
            .collect()
    }

    /// Lab-frame drive and coupling terms of each step, without crosstalk.
    pub fn control_hamiltonians(&self) -> Result<Vec<Arc<dyn Hamiltonian>>> {
        let reg = &self.register;
        let a = self.amplitude;
        match (self.kind, self.params.scheme) {
            (ScenarioKind::S1 | ScenarioKind::S1b, Scheme::Dy) => {
                Ok(vec![build_drive(reg, &[DriveTerm::x(q(1, 1), self.sin2(a)?)])?.into_shared()])
            }
            (ScenarioKind::S1 | ScenarioKind::S1b, Scheme::Zzcm) => {
                let omega1 = Envelope::sum(vec![self.sin2(a)?, self.modulation()?]);
                Ok(vec![build_drive(reg, &[DriveTerm::x(q(1, 1), omega1)])?.into_shared()])
            }
            (ScenarioKind::S2, Scheme::Dy) => Ok(vec![build_drive(
                reg,
                &[DriveTerm::x(q(1, 1), self.sin2(a)?), DriveTerm::y(q(2, 2), self.sin2(a)?)],
            )?
            .into_shared()]),
            (ScenarioKind::S2, Scheme::Zzcm) => {
                let omega2 = Envelope::sum(vec![self.sin2(a)?, self.modulation()?]);
                Ok(vec![build_drive(reg, &[DriveTerm::x(q(1, 1), omega2.clone()), DriveTerm::y(q(2, 2), omega2)])?
                    .into_shared()])
            }
            (ScenarioKind::S2nn, Scheme::Dy) => Ok(vec![build_drive(
                reg,
                &[DriveTerm::x(q(1, 1), self.sin2(a)?), DriveTerm::y(q(1, 2), self.sin2(a)?)],
            )?
            .into_shared()]),
            (ScenarioKind::S2nn, Scheme::Zzcm) => {
                let m = self.modulation()?;
                let omega2 = Envelope::sum(vec![self.sin2(a)?, m.clone()]);
                Ok(vec![build_drive(
                    reg,
                    &[
                        DriveTerm::x(q(1, 1), omega2),
                        DriveTerm::y(q(1, 2), self.sin2(a)?),
                        DriveTerm::x(q(0, 2), m.clone()),
                        DriveTerm::x(q(1, 3), m.clone()),
                        DriveTerm::x(q(2, 2), m),
                    ],
                )?
                .into_shared()])
            }
            (ScenarioKind::S3, Scheme::Dy) => {
                let xy = build_xy(reg, &[XyEdge::new(q(1, 1), q(1, 2), self.sin2(a)?)?])?;
                if self.params.s3_drive == SingleQubitDriveMode::Omitted {
                    return Ok(vec![xy.into_shared()]);
                }
                let singles =
                    build_drive(reg, &[DriveTerm::x(q(0, 2), self.sin2(a)?), DriveTerm::y(q(1, 3), self.sin2(a)?)])?;
                Ok(vec![xy.plus(&singles)?.into_shared()])
            }
            (ScenarioKind::S4, Scheme::Dy) => Ok(vec![build_xy(
                reg,
                &[XyEdge::new(q(1, 1), q(1, 2), self.sin2(a)?)?, XyEdge::new(q(2, 1), q(2, 2), self.sin2(a)?)?],
            )?
            .into_shared()]),
            (ScenarioKind::S3 | ScenarioKind::S4, Scheme::Zzcm) => {
                let mut edges = vec![XyEdge::new(q(1, 1), q(1, 2), self.sin2(a)?)?];
                if self.kind == ScenarioKind::S4 {
                    edges.push(XyEdge::new(q(2, 1), q(2, 2), self.sin2(a)?)?);
                }
                let xy = build_xy(reg, &edges)?;
                let half = self.sin2(a / 2.0)?;
                let singles = [(q(0, 2), Axis::X), (q(1, 3), Axis::Y)];
                let mut steps: Vec<Arc<dyn Hamiltonian>> = Vec::new();
                for frame in self.frames()? {
                    let mut step = xy.plus(&frame.correction_hamiltonian())?;
                    if self.kind == ScenarioKind::S3 && self.params.s3_drive != SingleQubitDriveMode::Omitted {
                        for (site, axis) in singles {
                            let drive = match self.params.s3_drive {
                                SingleQubitDriveMode::Literal => {
                                    let term = match axis {
                                        Axis::Y => DriveTerm::y(site, half.clone()),
                                        _ => DriveTerm::x(site, half.clone()),
                                    };
                                    build_drive(reg, &[term])?
                                }
                                _ => frame.rotated_drive(site, axis, half.clone())?,
                            };
                            step = step.plus(&drive)?;
                        }
                    }
                    steps.push(step.into_shared());
                }
                Ok(steps)
            }
        }
    }

    /// Lab-frame schedule at crosstalk strength `eta`.
    pub fn schedule(&self, eta: f64) -> Result<Schedule> {
        let zz: Arc<dyn Hamiltonian> = self.zz_hamiltonian(eta)?.into_shared();
        let steps = self
            .control_hamiltonians()?
            .into_iter()
            .map(|h| {
                Ok(Step {
                    hamiltonian: Arc::new(HamiltonianSum::new(vec![h, zz.clone()])?) as Arc<dyn Hamiltonian>,
                    duration: self.step_time,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(steps)
    }

    /// Waveform applied to Q(1,1) in the first step (the coupling `J(t)`
    /// for the two-qubit baselines), with its duration.
    pub fn primary_waveform(&self) -> Result<(String, Envelope, f64)> {
        let a = self.amplitude;
        let (label, env) = match (self.kind, self.params.scheme) {
            (ScenarioKind::S3 | ScenarioKind::S4, Scheme::Dy) => ("J(t) on Q(1,1)-Q(1,2)", self.sin2(a)?),
            (ScenarioKind::S3 | ScenarioKind::S4, Scheme::Zzcm) => {
                ("frame drive on Q(1,1), step 1 (x axis)", self.modulation()?)
            }
            (_, Scheme::Dy) => ("drive on Q(1,1)", self.sin2(a)?),
            (_, Scheme::Zzcm) => ("drive on Q(1,1)", Envelope::sum(vec![self.sin2(a)?, self.modulation()?])),
        };
        Ok((label.to_string(), env, self.step_time))
    }

    /// Fidelity against the ideal target at a normalized crosstalk ratio.
    pub fn fidelity(&self, ratio: f64, config: &PropagatorConfig) -> Result<FidelityReport> {
        fidelity_report(&self.schedule(self.eta(ratio))?, &self.ideal()?, config)
    }

    /// Fidelity at zero crosstalk.
    pub fn self_test(&self, config: &PropagatorConfig) -> Result<FidelityReport> {
        self.fidelity(0.0, config)
    }
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub scenario: String,
    pub k: usize,
    pub eta_ratio: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    pub converged: bool,
    pub wall_ms: u64,
}

/// `count` evenly spaced values over `[min, max]`, endpoints included.
pub fn linspace(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidParameter(format!("grid bounds out of order: [{min}, {max}]")));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let n = (count - 1) as f64;
    let (center, half) = ((min + max) / 2.0, (max - min) / 2.0);
    Ok((0..count)
        .map(|i| match i {
            0 => min,
            i if i + 1 == count => max,
            i => center + half * (2.0 * i as f64 - n) / n,
        })
        .collect())
}

/// Evaluates every grid point in parallel; records come back in grid order.
pub fn run_sweep(scenario: &Scenario, grid: &[f64], config: &PropagatorConfig) -> Result<Vec<SweepRecord>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let ideal = scenario.ideal()?;
    grid.par_iter()
        .map(|&ratio| {
            let start = Instant::now();
            let schedule = scenario.schedule(scenario.eta(ratio))?;
            let report = fidelity_report(&schedule, &ideal, config)?;
            Ok(SweepRecord {
                scenario: scenario.name(),
                k: scenario.reported_k(),
                eta_ratio: ratio,
                fidelity: report.fidelity,
                infidelity: report.infidelity,
                converged: report.converged,
                wall_ms: start.elapsed().as_millis() as u64,
            })
        })
        .collect()
}

/// Worst-case infidelity over `grid` for each capped candidate k, and the
/// minimizing k.
pub fn select_k_capped(
    kind: ScenarioKind,
    candidates: &[usize],
    grid: &[f64],
    config: &PropagatorConfig,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    select_k(candidates, |k| {
        let params = ScenarioParams::for_kind(kind).with_k(k).with_amplitude(AmplitudeMode::Capped);
        let records = run_sweep(&Scenario::new(kind, params)?, grid, config)?;
        Ok(records.iter().map(|r| r.infidelity).fold(0.0, f64::max))
    })
}
