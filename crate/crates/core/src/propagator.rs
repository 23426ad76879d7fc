//! Time-ordered evolution of piecewise schedules, ideal target gates and
//! trace-fidelity evaluation with a step-halving convergence probe.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::{BasisPartition, Hamiltonian};
use crate::operator::{expm_hermitian, overlap_fidelity, Axis, DenseOperator, Matrix, QubitRegister, Site, C64};
use crate::pulse::check_support;

pub const DEFAULT_STEPS_PER_PERIOD: usize = 256;
pub const MIN_STEPS_PER_PERIOD: usize = 16;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const MAX_REFINEMENTS: usize = 2;

/// One-step update rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    /// `exp(−iH(t + h/2)h)`, second order.
    Midpoint,
    /// Two-point Gauss–Legendre Magnus expansion, fourth order.
    #[default]
    Magnus4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig {
    pub steps_per_period: usize,
    /// Largest accepted change of the fidelity metric under step halving.
    pub tolerance: f64,
    pub integrator: Integrator,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        PropagatorConfig {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            tolerance: DEFAULT_TOLERANCE,
            integrator: Integrator::default(),
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::InvalidParameter(format!(
                "steps_per_period must be at least {MIN_STEPS_PER_PERIOD}, got {}",
                self.steps_per_period
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// A Hamiltonian applied for `duration`, in its own local time `[0, duration]`.
#[derive(Clone, Debug)]
pub struct Step {
    pub hamiltonian: Arc<dyn Hamiltonian>,
    pub duration: f64,
}

#[derive(Clone, Debug)]
pub struct Schedule {
    register: Arc<QubitRegister>,
    steps: Vec<Step>,
}

impl Schedule {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        let first = steps.first().ok_or_else(|| Error::InvalidParameter("schedule has no steps".into()))?;
        let register = first.hamiltonian.register().clone();
        for s in &steps {
            if s.hamiltonian.register().as_ref() != register.as_ref() {
                return Err(Error::RegisterMismatch);
            }
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::InvalidParameter(format!("step duration must be positive, got {}", s.duration)));
            }
            check_support(s.duration, s.hamiltonian.support_end())?;
        }
        Ok(Schedule { register, steps })
    }

    pub fn single(hamiltonian: Arc<dyn Hamiltonian>, duration: f64) -> Result<Self> {
        Schedule::new(vec![Step { hamiltonian, duration }])
    }

    pub fn register(&self) -> &Arc<QubitRegister> {
        &self.register
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    fn blocks(&self) -> Vec<Vec<usize>> {
        let mut p = BasisPartition::new(self.register.dim());
        for s in &self.steps {
            s.hamiltonian.connect(&mut p);
        }
        p.components()
    }

    fn step_count(step: &Step, steps_per_period: usize) -> usize {
        match step.hamiltonian.shortest_period() {
            Some(period) if period > 0.0 => {
                let dt = period / steps_per_period as f64;
                ((step.duration / dt) - 1e-9).ceil().max(1.0) as usize
            }
            _ => 1,
        }
    }
}

/// Evolution at a fixed resolution, without a convergence probe.
pub fn evolve_fixed(schedule: &Schedule, steps_per_period: usize, integrator: Integrator) -> DenseOperator {
    let dim = schedule.register.dim();
    let blocks = schedule.blocks();
    let mut block_u: Vec<Matrix> = blocks.iter().map(|b| Matrix::identity(b.len(), b.len())).collect();
    let mut h1 = Matrix::zeros(dim, dim);
    let mut h2 = Matrix::zeros(dim, dim);
    for step in &schedule.steps {
        let n = Schedule::step_count(step, steps_per_period);
        let h = step.duration / n as f64;
        let ham = step.hamiltonian.as_ref();
        for i in 0..n {
            let t0 = h * i as f64;
            match integrator {
                Integrator::Midpoint => {
                    h1.fill(C64::new(0.0, 0.0));
                    ham.accumulate(t0 + 0.5 * h, &mut h1);
                    for (b, u) in blocks.iter().zip(block_u.iter_mut()) {
                        let g = restrict(&h1, b);
                        *u = expm_hermitian(g, h) * &*u;
                    }
                }
                Integrator::Magnus4 => {
                    let off = 3f64.sqrt() / 6.0;
                    h1.fill(C64::new(0.0, 0.0));
                    h2.fill(C64::new(0.0, 0.0));
                    ham.accumulate(t0 + (0.5 - off) * h, &mut h1);
                    ham.accumulate(t0 + (0.5 + off) * h, &mut h2);
                    let c = C64::new(0.0, -3f64.sqrt() * h * h / 12.0);
                    for (b, u) in blocks.iter().zip(block_u.iter_mut()) {
                        let a1 = restrict(&h1, b);
                        let a2 = restrict(&h2, b);
                        let comm = &a2 * &a1 - &a1 * &a2;
                        let g = (&a1 + &a2) * C64::new(0.5 * h, 0.0) + comm * c;
                        *u = expm_hermitian(g, 1.0) * &*u;
                    }
                }
            }
        }
    }
    let mut full = Matrix::zeros(dim, dim);
    for (b, u) in blocks.iter().zip(&block_u) {
        for (j, &cj) in b.iter().enumerate() {
            for (i, &ri) in b.iter().enumerate() {
                full[(ri, cj)] = u[(i, j)];
            }
        }
    }
    DenseOperator::from_matrix(schedule.register.clone(), full).expect("dimension matches register")
}

fn restrict(m: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// A converged evolution with its probe diagnostics.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub unitary: DenseOperator,
    /// `1 − F(U_coarse, U_fine)` of the last comparison.
    pub difference: f64,
    /// Resolution of `unitary`.
    pub steps_per_period: usize,
}

fn probe<T, R, D>(config: &PropagatorConfig, run: R, diff: D) -> Result<(T, T, f64, usize, bool)>
where
    T: Send,
    R: Fn(usize) -> T + Sync,
    D: Fn(&T, &T) -> f64,
{
    config.validate()?;
    let mut n = config.steps_per_period;
    let (mut coarse, mut fine) = rayon::join(|| run(n), || run(2 * n));
    let mut d = diff(&coarse, &fine);
    for _ in 0..MAX_REFINEMENTS {
        if d <= config.tolerance {
            break;
        }
        n *= 2;
        coarse = fine;
        fine = run(2 * n);
        d = diff(&coarse, &fine);
    }
    Ok((coarse, fine, d, 2 * n, d <= config.tolerance))
}

/// Evolves the schedule and checks that halving the step changes the
/// unitary by at most `config.tolerance` in `1 − F`.
pub fn evolve(schedule: &Schedule, config: &PropagatorConfig) -> Result<Evolution> {
    let (coarse, fine, difference, spp, ok) = probe(
        config,
        |n| evolve_fixed(schedule, n, config.integrator),
        |a, b| 1.0 - overlap_fidelity(a.matrix(), b.matrix()),
    )?;
    if !ok {
        return Err(Error::UnitaryNotConverged { coarse: Box::new(coarse), fine: Box::new(fine), difference });
    }
    Ok(Evolution { unitary: fine, difference, steps_per_period: spp })
}

/// Fidelity of one schedule against an ideal gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub infidelity: f64,
    /// `|F(Δt) − F(Δt/2)|` of the last comparison.
    pub difference: f64,
    pub converged: bool,
    pub steps_per_period: usize,
    /// `‖U†U − I‖_max` of the evolved operator.
    pub unitarity_deviation: f64,
}

/// Like [`gate_fidelity`] but reports non-convergence through the flag.
pub fn fidelity_report(
    schedule: &Schedule,
    ideal: &DenseOperator,
    config: &PropagatorConfig,
) -> Result<FidelityReport> {
    if ideal.register().as_ref() != schedule.register.as_ref() {
        return Err(Error::RegisterMismatch);
    }
    let run = |n| {
        let u = evolve_fixed(schedule, n, config.integrator);
        let f = overlap_fidelity(ideal.matrix(), u.matrix());
        (f, u.unitarity_deviation())
    };
    let (_, (fidelity, dev), difference, spp, converged) = probe(config, run, |a, b| (a.0 - b.0).abs())?;
    Ok(FidelityReport {
        fidelity,
        infidelity: 1.0 - fidelity,
        difference,
        converged,
        steps_per_period: spp,
        unitarity_deviation: dev,
    })
}

/// `trace_fidelity(ideal, evolve(schedule))`, failing on non-convergence.
pub fn gate_fidelity(schedule: &Schedule, ideal: &DenseOperator, config: &PropagatorConfig) -> Result<FidelityReport> {
    let report = fidelity_report(schedule, ideal, config)?;
    if !report.converged {
        let coarse_run = evolve_fixed(schedule, report.steps_per_period / 2, config.integrator);
        let coarse = overlap_fidelity(ideal.matrix(), coarse_run.matrix());
        return Err(Error::FidelityNotConverged { coarse, fine: report.fidelity, difference: report.difference });
    }
    Ok(report)
}

/// Target gates, written as rotations so that their phases are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateLabel {
    Identity,
    /// `exp(−iπσˣ/4)`.
    HalfX,
    /// `exp(−iπσˣ/2)`.
    X,
    /// `exp(−iπσʸ/2)`.
    Y,
    /// `exp(−iπσʸσʸ/4)·exp(−iπσˣσˣ/4)` on an ordered pair.
    Swap,
}

impl GateLabel {
    pub fn arity(self) -> usize {
        match self {
            GateLabel::Swap => 2,
            _ => 1,
        }
    }

    pub fn matrix(self) -> Matrix {
        let single = |axis: Axis, angle: f64| {
            let r = axis.rotation(angle);
            Matrix::from_fn(2, 2, |i, j| r[(i, j)])
        };
        match self {
            GateLabel::Identity => Matrix::identity(2, 2),
            GateLabel::HalfX => single(Axis::X, PI / 4.0),
            GateLabel::X => single(Axis::X, PI / 2.0),
            GateLabel::Y => single(Axis::Y, PI / 2.0),
            GateLabel::Swap => {
                let pair = |axis: Axis| {
                    let p = axis.pauli();
                    let p = Matrix::from_fn(2, 2, |i, j| p[(i, j)]);
                    expm_hermitian(p.kronecker(&p), PI / 4.0)
                };
                pair(Axis::Y) * pair(Axis::X)
            }
        }
    }
}

/// Tensor product of the listed gates, identity on every other site.
pub fn ideal_gate(register: &Arc<QubitRegister>, gates: &[(Vec<Site>, GateLabel)]) -> Result<DenseOperator> {
    let mut seen: Vec<Site> = Vec::new();
    let mut u = DenseOperator::identity(register.clone());
    for (sites, label) in gates {
        if sites.len() != label.arity() {
            return Err(Error::InvalidParameter(format!(
                "gate {label:?} acts on {} sites, got {}",
                label.arity(),
                sites.len()
            )));
        }
        for s in sites {
            if seen.contains(s) {
                return Err(Error::OverlappingGates(*s));
            }
            seen.push(*s);
        }
        let g = DenseOperator::embed_local(register.clone(), sites, &label.matrix())?;
        u = u.try_mul(&g)?;
    }
    Ok(u)
}
