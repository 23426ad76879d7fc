//! Error cumulant of the frame-averaged ZZ term, its zeros in the modulation
//! ratio γ, and amplitude-capped selection of the repetition count k.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulse::Envelope;
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-12;
/// Accepted root: `EC < ROOT_THRESHOLD · η τ`.
pub const ROOT_THRESHOLD: f64 = 1e-9;
pub const SCAN_STEP: f64 = 0.01;

/// One modulated gate: pulse area `a`, repetitions `k`, ratio `γ = ω/(kΩ₀)`,
/// crosstalk scale `η` and base amplitude `Ω₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CumulantSpec {
    pub area: f64,
    pub k: usize,
    pub gamma: f64,
    pub eta: f64,
    pub omega0: f64,
}

impl CumulantSpec {
    pub fn new(area: f64, k: usize, gamma: f64, eta: f64) -> Result<Self> {
        let spec = CumulantSpec { area, k, gamma, eta, omega0: 1.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_omega0(mut self, omega0: f64) -> Result<Self> {
        self.omega0 = omega0;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.area > 0.0) || !self.area.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse area must be positive, got {}", self.area)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::InvalidParameter(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !self.gamma.is_finite() || !self.eta.is_finite() {
            return Err(Error::InvalidParameter("gamma and eta must be finite".into()));
        }
        Ok(())
    }

    /// Gate time `T` with `∫Ω₀ sin²(πt/T) dt = a`.
    pub fn gate_time(&self) -> f64 {
        2.0 * self.area / self.omega0
    }

    pub fn period(&self) -> f64 {
        self.gate_time() / self.k as f64
    }

    /// Modulation amplitude `ω = γ k Ω₀`.
    pub fn omega(&self) -> f64 {
        self.gamma * self.k as f64 * self.omega0
    }

    /// `χ(t) = (2ωτ/π) sin²(πt/τ)`.
    pub fn chi(&self, t: f64) -> f64 {
        let tau = self.period();
        let s = (PI * t / tau).sin();
        2.0 * self.omega() * tau / PI * s * s
    }
}

/// `EC = η [|∫cos χ dt| + |∫sin χ dt|]` over the first period.
pub fn error_cumulant(spec: &CumulantSpec) -> Result<f64> {
    error_cumulant_segment(spec, 1)
}

/// Error cumulant over the `segment`-th period (1-based).
pub fn error_cumulant_segment(spec: &CumulantSpec, segment: usize) -> Result<f64> {
    spec.validate()?;
    if segment == 0 || segment > spec.k {
        return Err(Error::SegmentOutOfRange { segment, count: spec.k });
    }
    let tau = spec.period();
    let (a, b) = (tau * (segment - 1) as f64, tau * segment as f64);
    let c: f64 = integrate(|t| spec.chi(t).cos(), a, b, QUAD_TOL)?;
    let s: f64 = integrate(|t| spec.chi(t).sin(), a, b, QUAD_TOL)?;
    Ok(spec.eta.abs() * (c.abs() + s.abs()))
}

fn normalized(area: f64, k: usize, gamma: f64) -> Result<f64> {
    let spec = CumulantSpec::new(area, k, gamma, 1.0)?;
    Ok(error_cumulant(&spec)? / spec.period())
}

/// `(γ, EC/(ητ))` on a uniform grid over `[lo, hi]`.
pub fn gamma_scan(area: f64, k: usize, lo: f64, hi: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("bad scan range [{lo}, {hi}] with step {step}")));
    }
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| {
            let g = if i == n { hi } else { lo + step * i as f64 };
            normalized(area, k, g).map(|v| (g, v))
        })
        .collect()
}

/// Result of a root search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaRoot {
    pub gamma: f64,
    /// `EC/(ητ)` at `gamma`.
    pub residual: f64,
}

/// The `root_index`-th (0-based) smallest γ in `[lo, hi]` where the error
/// cumulant vanishes, found by a coarse scan plus golden-section refinement.
pub fn find_gamma(area: f64, k: usize, lo: f64, hi: f64, root_index: usize) -> Result<GammaRoot> {
    let scan = gamma_scan(area, k, lo, hi, SCAN_STEP)?;
    let f = |g: f64| normalized(area, k, g).unwrap_or(f64::INFINITY);
    let mut found = 0;
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 0..scan.len() {
        let v = scan[i].1;
        let left = if i > 0 { scan[i - 1].1 } else { f64::INFINITY };
        let right = scan.get(i + 1).map_or(f64::INFINITY, |p| p.1);
        if !(v <= left && v <= right) {
            continue;
        }
        let a = if i > 0 { scan[i - 1].0 } else { scan[i].0 };
        let b = scan.get(i + 1).map_or(scan[i].0, |p| p.0);
        let (g, r) = golden_min(&f, a, b);
        if r < best.1 {
            best = (g, r);
        }
        if r < ROOT_THRESHOLD {
            if found == root_index {
                return Ok(GammaRoot { gamma: g, residual: r });
            }
            found += 1;
        }
    }
    if best.0.is_nan() {
        best = scan.iter().fold((f64::NAN, f64::INFINITY), |acc, &(g, v)| if v < acc.1 { (g, v) } else { acc });
    }
    Err(Error::NoRoot { min_gamma: best.0, min_value: best.1 })
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `M(k, γ) = max_s |sin²(πs) + γk sin(2πks)|` over `s ∈ [0, 1]`: the peak of
/// the modulated drive in units of `Ω₀`.
pub fn peak_amplitude(k: usize, gamma: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let env =
        Envelope::sum(vec![Envelope::sin_squared(1.0, 1.0)?, Envelope::modulation(gamma * k as f64, 1.0 / k as f64)?]);
    env.max_abs(0.0, 1.0)
}

/// Picks the candidate with the smallest `worst_case(k)`; ties go to the
/// smaller k. Candidates are evaluated in parallel and returned in input order.
pub fn select_k<F>(candidates: &[usize], worst_case: F) -> Result<(usize, Vec<(usize, f64)>)>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let scores: Vec<(usize, f64)> =
        candidates.par_iter().map(|&k| worst_case(k).map(|v| (k, v))).collect::<Result<_>>()?;
    let best = scores
        .iter()
        .copied()
        .reduce(|a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })
        .expect("non-empty");
    Ok((best.0, scores))
}
