//! Globally adaptive Gauss–Kronrod (7/15) quadrature for scalar and
//! matrix-valued integrands.

use crate::error::{Error, Result};
use crate::operator::Matrix;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_INTERVALS: usize = 4000;

/// Values that can be integrated: a vector space with a max-norm.
pub trait Integrand: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, weight: f64);
    fn max_norm(&self) -> f64;
}

impl Integrand for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }

    fn add_scaled(&mut self, other: &Self, weight: f64) {
        *self += weight * other;
    }

    fn max_norm(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Matrix {
    fn zero_like(&self) -> Self {
        Matrix::zeros(self.nrows(), self.ncols())
    }

    fn add_scaled(&mut self, other: &Self, weight: f64) {
        self.zip_apply(other, |a, b| *a += b * weight);
    }

    fn max_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn kronrod<T: Integrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc.zero_like();
    let mut gauss = fc.zero_like();
    kronrod.add_scaled(&fc, WGK[7]);
    gauss.add_scaled(&fc, WG[3]);
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod.add_scaled(&f1, WGK[j]);
        kronrod.add_scaled(&f2, WGK[j]);
        if j % 2 == 1 {
            gauss.add_scaled(&f1, WG[j / 2]);
            gauss.add_scaled(&f2, WG[j / 2]);
        }
    }
    let mut diff = kronrod.clone();
    diff.add_scaled(&gauss, -1.0);
    let mut value = kronrod.zero_like();
    value.add_scaled(&kronrod, half);
    Segment { a, b, value, error: diff.max_norm() * half.abs() }
}

/// Integrates `f` over `[a, b]` until the summed Kronrod–Gauss error
/// estimate falls below `abs_tol`.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<T>
where
    T: Integrand,
    F: FnMut(f64) -> T,
{
    if a == b {
        let probe = f(a);
        return Ok(probe.zero_like());
    }
    let mut segments = vec![kronrod(&mut f, a, b)];
    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        if total_error <= abs_tol {
            break;
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { error: total_error });
        }
        let (worst, _) = segments.iter().enumerate().max_by(|x, y| x.1.error.total_cmp(&y.1.error)).expect("non-empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval can no longer be split in floating point
            return Err(Error::Quadrature { error: total_error });
        }
        segments.push(kronrod(&mut f, seg.a, mid));
        segments.push(kronrod(&mut f, mid, seg.b));
    }
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = segments[0].value.zero_like();
    for s in &segments {
        total.add_scaled(&s.value, 1.0);
    }
    Ok(total)
}
