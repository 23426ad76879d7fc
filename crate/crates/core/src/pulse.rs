//! Closed-form scalar envelopes for drives, couplings and frame phases.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

const GRID_PER_PERIOD: usize = 4096;
const REFINED_PEAKS: usize = 16;
const SUPPORT_SLACK: f64 = 1e-12;
const AREA_TOL: f64 = 1e-12;

/// Scalar function of time in angular-frequency units (rad / time).
#[derive(Clone, Debug, PartialEq)]
pub enum Envelope {
    /// `A sin²(π t / T)` on `[0, T]`.
    SinSquared {
        amplitude: f64,
        duration: f64,
    },
    /// `ω sin(2π t / τ)`.
    Modulation {
        amplitude: f64,
        period: f64,
    },
    Sum(Vec<Envelope>),
    Scaled {
        factor: f64,
        inner: Box<Envelope>,
    },
    Constant(f64),
    /// Pointwise product of the factors.
    Product(Vec<Envelope>),
    /// `cos(m θ(t))` or `sin(m θ(t))` for a frame phase `θ`.
    PhaseHarmonic {
        profile: PhaseProfile,
        multiple: f64,
        harmonic: Harmonic,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Harmonic {
    Cos,
    Sin,
}

impl Envelope {
    pub fn sin_squared(amplitude: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!("pulse duration must be positive, got {duration}")));
        }
        Ok(Envelope::SinSquared { amplitude, duration })
    }

    pub fn modulation(amplitude: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidParameter(format!("modulation period must be positive, got {period}")));
        }
        Ok(Envelope::Modulation { amplitude, period })
    }

    pub fn constant(value: f64) -> Self {
        Envelope::Constant(value)
    }

    pub fn sum(parts: Vec<Envelope>) -> Self {
        Envelope::Sum(parts)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Envelope::Scaled { factor, inner: Box::new(self) }
    }

    pub fn product(factors: Vec<Envelope>) -> Self {
        Envelope::Product(factors)
    }

    pub fn phase_harmonic(profile: PhaseProfile, multiple: f64, harmonic: Harmonic) -> Self {
        Envelope::PhaseHarmonic { profile, multiple, harmonic }
    }

    /// End of the declared support `[0, end]`; `None` when unbounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Envelope::SinSquared { duration, .. } => Some(*duration),
            Envelope::Modulation { .. } | Envelope::Constant(_) | Envelope::PhaseHarmonic { .. } => None,
            Envelope::Sum(parts) | Envelope::Product(parts) => {
                parts.iter().filter_map(Envelope::support_end).reduce(f64::min)
            }
            Envelope::Scaled { inner, .. } => inner.support_end(),
        }
    }

    /// Shortest oscillation period among the components; `None` for constants.
    pub fn shortest_period(&self) -> Option<f64> {
        match self {
            Envelope::SinSquared { duration, .. } => Some(*duration),
            Envelope::Modulation { period, .. } => Some(*period),
            Envelope::Constant(_) => None,
            Envelope::PhaseHarmonic { profile, .. } => Some(profile.period()),
            Envelope::Sum(parts) | Envelope::Product(parts) => {
                parts.iter().filter_map(Envelope::shortest_period).reduce(f64::min)
            }
            Envelope::Scaled { inner, .. } => inner.shortest_period(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Envelope::Constant(_) => true,
            Envelope::Sum(parts) | Envelope::Product(parts) => parts.iter().all(Envelope::is_constant),
            Envelope::Scaled { inner, .. } => inner.is_constant(),
            _ => false,
        }
    }

    pub(crate) fn check_support(&self, t: f64) -> Result<()> {
        check_support(t, self.support_end())
    }

    /// Pointwise value with a support check.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_support(t)?;
        Ok(self.value(t))
    }

    /// Pointwise value without a support check.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::SinSquared { amplitude, duration } => {
                let s = (PI * t / duration).sin();
                amplitude * s * s
            }
            Envelope::Modulation { amplitude, period } => amplitude * (2.0 * PI * t / period).sin(),
            Envelope::Sum(parts) => parts.iter().map(|p| p.value(t)).sum(),
            Envelope::Scaled { factor, inner } => factor * inner.value(t),
            Envelope::Constant(c) => *c,
            Envelope::Product(parts) => parts.iter().map(|p| p.value(t)).product(),
            Envelope::PhaseHarmonic { profile, multiple, harmonic } => {
                let x = multiple * profile.theta(t);
                match harmonic {
                    Harmonic::Cos => x.cos(),
                    Harmonic::Sin => x.sin(),
                }
            }
        }
    }

    fn has_antiderivative(&self) -> bool {
        match self {
            Envelope::Product(_) | Envelope::PhaseHarmonic { .. } => false,
            Envelope::Sum(parts) => parts.iter().all(Envelope::has_antiderivative),
            Envelope::Scaled { inner, .. } => inner.has_antiderivative(),
            _ => true,
        }
    }

    fn antiderivative(&self, t: f64) -> f64 {
        match self {
            Envelope::SinSquared { amplitude, duration } => {
                amplitude * (0.5 * t - duration / (4.0 * PI) * (2.0 * PI * t / duration).sin())
            }
            Envelope::Modulation { amplitude, period } => {
                -amplitude * period / (2.0 * PI) * (2.0 * PI * t / period).cos()
            }
            Envelope::Sum(parts) => parts.iter().map(|p| p.antiderivative(t)).sum(),
            Envelope::Scaled { factor, inner } => factor * inner.antiderivative(t),
            Envelope::Constant(c) => c * t,
            Envelope::Product(_) | Envelope::PhaseHarmonic { .. } => {
                unreachable!("no closed-form antiderivative")
            }
        }
    }

    /// `∫_{t0}^{t1} env(t) dt`, in closed form where one exists and by
    /// adaptive quadrature otherwise.
    pub fn area(&self, t0: f64, t1: f64) -> Result<f64> {
        if t0 > t1 {
            return Err(Error::InvalidParameter(format!("area bounds out of order: {t0} > {t1}")));
        }
        self.check_support(t0)?;
        self.check_support(t1)?;
        if self.has_antiderivative() {
            Ok(self.antiderivative(t1) - self.antiderivative(t0))
        } else {
            integrate(|t| self.value(t), t0, t1, AREA_TOL)
        }
    }

    /// `max |env(t)|` over `[t0, t1]`: dense grid followed by golden-section
    /// refinement of the largest local peaks.
    pub fn max_abs(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(t0 < t1) {
            return Err(Error::InvalidParameter(format!("max_abs needs t0 < t1, got [{t0}, {t1}]")));
        }
        self.check_support(t0)?;
        self.check_support(t1)?;
        let span = t1 - t0;
        let per_period = match self.shortest_period() {
            Some(p) => (span / p).ceil().max(1.0) as usize,
            None => 1,
        };
        let n = GRID_PER_PERIOD * per_period;
        let h = span / n as f64;
        let samples: Vec<f64> = (0..=n).map(|i| self.value(t0 + h * i as f64).abs()).collect();

        let mut peaks: Vec<usize> = (0..=n)
            .filter(|&i| {
                let left = if i == 0 { f64::NEG_INFINITY } else { samples[i - 1] };
                let right = if i == n { f64::NEG_INFINITY } else { samples[i + 1] };
                samples[i] >= left && samples[i] >= right
            })
            .collect();
        peaks.sort_by(|a, b| samples[*b].total_cmp(&samples[*a]));
        peaks.truncate(REFINED_PEAKS);

        let mut best = samples.iter().copied().fold(0.0, f64::max);
        for i in peaks {
            let lo = t0 + h * i.saturating_sub(1) as f64;
            let hi = (t0 + h * (i + 1) as f64).min(t1);
            best = best.max(golden_max(|t| self.value(t).abs(), lo, hi));
        }
        Ok(best)
    }

    /// Uniform samples `(t, value)` over `[t0, t1]` at `rate` samples per
    /// unit time, always including both endpoints.
    pub fn sample(&self, t0: f64, t1: f64, rate: f64) -> Result<Vec<(f64, f64)>> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("sample rate must be positive, got {rate}")));
        }
        if t0 > t1 {
            return Err(Error::InvalidParameter(format!("sample bounds out of order: {t0} > {t1}")));
        }
        self.check_support(t0)?;
        self.check_support(t1)?;
        let intervals = ((t1 - t0) * rate).ceil().max(1.0) as usize;
        let h = (t1 - t0) / intervals as f64;
        Ok((0..=intervals)
            .map(|i| {
                let t = if i == intervals { t1 } else { t0 + h * i as f64 };
                (t, self.value(t))
            })
            .collect())
    }
}

pub(crate) fn check_support(t: f64, end: Option<f64>) -> Result<()> {
    let end_val = end.unwrap_or(f64::INFINITY);
    let slack = SUPPORT_SLACK * end_val.abs().clamp(1.0, 1e12);
    if !t.is_finite() || t < -slack || t > end_val + slack {
        return Err(Error::OutOfSupport { t, start: 0.0, end: end_val });
    }
    Ok(())
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
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
    fc.max(fd).max(f(a)).max(f(b))
}

/// Frame phase `θ(t) = (ω τ / π) sin²(π t / τ)`, with `dθ/dt = ω sin(2π t / τ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseProfile {
    omega: f64,
    period: f64,
}

impl PhaseProfile {
    pub fn new(omega: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phase profile needs finite omega and positive period, got omega={omega}, period={period}"
            )));
        }
        Ok(PhaseProfile { omega, period })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn theta(&self, t: f64) -> f64 {
        let s = (PI * t / self.period).sin();
        self.omega * self.period / PI * s * s
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.omega * (2.0 * PI * t / self.period).sin()
    }

    /// `dθ/dt` as an envelope.
    pub fn rate_envelope(&self) -> Envelope {
        Envelope::Modulation { amplitude: self.omega, period: self.period }
    }
}

/// Writes `(t, value)` samples as a two-column CSV with header `t,value`.
pub fn write_waveform_csv<W: Write>(mut out: W, samples: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in samples {
        writeln!(out, "{t},{v}")?;
    }
    out.flush()
}
