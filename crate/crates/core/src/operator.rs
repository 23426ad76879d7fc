//! Dense complex operators on small qubit registers.
//!
//! Qubit ordering is big-endian over the register's label list: the first
//! label is the most significant bit of the computational-basis index.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// Maximum elementwise deviation from Hermiticity accepted for Hamiltonians.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Maximum elementwise deviation of `U†U` from identity accepted for unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Lattice coordinate of a qubit, `Q(row, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub row: i32,
    pub col: i32,
}

impl Site {
    pub const fn new(row: i32, col: i32) -> Self {
        Site { row, col }
    }

    pub const fn offset(self, drow: i32, dcol: i32) -> Self {
        Site::new(self.row + drow, self.col + dcol)
    }

    pub fn is_adjacent(self, other: Site) -> bool {
        (self.row - other.row).abs() + (self.col - other.col).abs() == 1
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q({},{})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Matrix2<C64> {
        match self {
            Axis::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
            Axis::Y => Matrix2::new(ZERO, -I, I, ZERO),
            Axis::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    /// `exp(-i angle σ)` as a 2×2 matrix.
    pub fn rotation(self, angle: f64) -> Matrix2<C64> {
        let (s, c) = angle.sin_cos();
        Matrix2::identity() * C64::new(c, 0.0) - self.pauli() * C64::new(0.0, s)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

/// Ordered set of lattice sites making up the simulated Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitRegister {
    labels: Vec<Site>,
}

impl QubitRegister {
    pub fn new(labels: Vec<Site>) -> Result<Arc<Self>> {
        if labels.is_empty() {
            return Err(Error::EmptyRegister);
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::DuplicateSite(*a));
            }
        }
        if labels.len() > 16 {
            return Err(Error::RegisterTooLarge(labels.len()));
        }
        Ok(Arc::new(QubitRegister { labels }))
    }

    pub fn labels(&self) -> &[Site] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn contains(&self, site: Site) -> bool {
        self.labels.contains(&site)
    }

    pub fn position(&self, site: Site) -> Result<usize> {
        self.labels.iter().position(|s| *s == site).ok_or(Error::UnknownSite(site))
    }

    /// Bit mask of `site` inside a computational-basis index.
    pub fn bit(&self, site: Site) -> Result<usize> {
        let pos = self.position(site)?;
        Ok(1 << (self.labels.len() - 1 - pos))
    }
}

/// Square complex matrix tied to a qubit register.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    register: Arc<QubitRegister>,
    matrix: Matrix,
}

impl DenseOperator {
    pub fn from_matrix(register: Arc<QubitRegister>, matrix: Matrix) -> Result<Self> {
        let dim = register.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(DenseOperator { register, matrix })
    }

    pub fn identity(register: Arc<QubitRegister>) -> Self {
        let dim = register.dim();
        DenseOperator { register, matrix: Matrix::identity(dim, dim) }
    }

    pub fn zeros(register: Arc<QubitRegister>) -> Self {
        let dim = register.dim();
        DenseOperator { register, matrix: Matrix::zeros(dim, dim) }
    }

    /// Single-site Pauli `I ⊗ … ⊗ σ^axis ⊗ … ⊗ I`.
    pub fn embed_pauli(register: Arc<QubitRegister>, site: Site, axis: Axis) -> Result<Self> {
        Self::product_term(register, &[(site, axis)])
    }

    /// Product of single-site Paulis on distinct sites, e.g. `σᶻ_a σᶻ_b`.
    pub fn product_term(register: Arc<QubitRegister>, factors: &[(Site, Axis)]) -> Result<Self> {
        let entries = pauli_string_entries(&register, factors)?;
        let dim = register.dim();
        let mut matrix = Matrix::zeros(dim, dim);
        for (r, c, v) in entries {
            matrix[(r, c)] = v;
        }
        Ok(DenseOperator { register, matrix })
    }

    /// Embeds an operator acting on `sites` (big-endian in the given order)
    /// into the full register.
    pub fn embed_local(register: Arc<QubitRegister>, sites: &[Site], local: &Matrix) -> Result<Self> {
        let local_dim = 1usize << sites.len();
        if local.nrows() != local_dim || local.ncols() != local_dim {
            return Err(Error::DimensionMismatch { expected: local_dim, found: local.nrows() });
        }
        let mut bits = Vec::with_capacity(sites.len());
        for (i, s) in sites.iter().enumerate() {
            if sites[..i].contains(s) {
                return Err(Error::DuplicateSite(*s));
            }
            bits.push(register.bit(*s)?);
        }
        let mask: usize = bits.iter().sum();
        let dim = register.dim();
        let local_index = |full: usize| bits.iter().fold(0usize, |acc, b| (acc << 1) | usize::from(full & b != 0));
        let mut matrix = Matrix::zeros(dim, dim);
        for c in 0..dim {
            let lc = local_index(c);
            let rest = c & !mask;
            for lr in 0..local_dim {
                let v = local[(lr, lc)];
                if v == ZERO {
                    continue;
                }
                let mut r = rest;
                for (j, b) in bits.iter().enumerate() {
                    if lr & (1 << (sites.len() - 1 - j)) != 0 {
                        r |= b;
                    }
                }
                matrix[(r, c)] = v;
            }
        }
        Ok(DenseOperator { register, matrix })
    }

    pub fn register(&self) -> &Arc<QubitRegister> {
        &self.register
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator { register: self.register.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseOperator { register: self.register.clone(), matrix: self.matrix.map(|v| v * factor) }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn check_same(&self, other: &DenseOperator) -> Result<()> {
        if Arc::ptr_eq(&self.register, &other.register) || self.register == other.register {
            Ok(())
        } else {
            Err(Error::RegisterMismatch)
        }
    }

    pub fn try_add(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(DenseOperator { register: self.register.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(DenseOperator { register: self.register.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn try_mul(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same(other)?;
        Ok(DenseOperator { register: self.register.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn commutator(&self, other: &DenseOperator) -> Result<Self> {
        self.check_same(other)?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        Ok(DenseOperator { register: self.register.clone(), matrix: ab - ba })
    }

    /// `max |M - M†|` over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    /// `max |U†U - I|` over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        max_abs_diff(&prod, &Matrix::identity(self.dim(), self.dim()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= HERMITIAN_TOL
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= UNITARY_TOL
    }

    /// Largest elementwise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check_same(other)?;
        Ok(max_abs_diff(&self.matrix, &other.matrix))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `exp(-i · angle · H)` by eigendecomposition.
    pub fn herm_expm(&self, angle: f64) -> Result<Self> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(DenseOperator { register: self.register.clone(), matrix: expm_hermitian(self.matrix.clone(), angle) })
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let mut vals: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }

    /// Tensor product with a second operator on a disjoint register.
    pub fn tensor(&self, other: &DenseOperator) -> Result<Self> {
        let mut labels = self.register.labels().to_vec();
        labels.extend_from_slice(other.register.labels());
        let register = QubitRegister::new(labels)?;
        Ok(DenseOperator { register, matrix: self.matrix.kronecker(&other.matrix) })
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    /// Panics on register mismatch; use [`DenseOperator::try_add`] otherwise.
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        self.try_add(rhs).expect("operators on different registers")
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        self.try_sub(rhs).expect("operators on different registers")
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.try_mul(rhs).expect("operators on different registers")
    }
}

/// `|Tr(U_ideal† U_actual)| / |Tr(U_ideal† U_ideal)|`.
pub fn trace_fidelity(ideal: &DenseOperator, actual: &DenseOperator) -> Result<f64> {
    ideal.check_same(actual)?;
    Ok(overlap_fidelity(ideal.matrix(), actual.matrix()))
}

pub(crate) fn overlap_fidelity(ideal: &Matrix, actual: &Matrix) -> f64 {
    let overlap: C64 = ideal.iter().zip(actual.iter()).map(|(a, b)| a.conj() * b).sum();
    let norm: f64 = ideal.iter().map(|a| a.norm_sqr()).sum();
    (overlap.norm() / norm).min(1.0)
}

/// Nonzero entries `(row, col, value)` of a Pauli string on the register.
pub(crate) fn pauli_string_entries(
    register: &QubitRegister,
    factors: &[(Site, Axis)],
) -> Result<Vec<(usize, usize, C64)>> {
    let mut flip = 0usize;
    let mut phase_bits: Vec<(usize, Axis)> = Vec::with_capacity(factors.len());
    for (i, (site, axis)) in factors.iter().enumerate() {
        if factors[..i].iter().any(|(s, _)| s == site) {
            return Err(Error::DuplicateSite(*site));
        }
        let bit = register.bit(*site)?;
        if matches!(axis, Axis::X | Axis::Y) {
            flip |= bit;
        }
        phase_bits.push((bit, *axis));
    }
    let dim = register.dim();
    let mut out = Vec::with_capacity(dim);
    for col in 0..dim {
        let row = col ^ flip;
        let mut value = ONE;
        for &(bit, axis) in &phase_bits {
            let set = col & bit != 0;
            // <row| σ |col> for the single-site factor.
            value *= match (axis, set) {
                (Axis::X, _) => ONE,
                (Axis::Y, false) => I,
                (Axis::Y, true) => -I,
                (Axis::Z, false) => ONE,
                (Axis::Z, true) => -ONE,
            };
        }
        out.push((row, col, value));
    }
    Ok(out)
}

pub(crate) fn hermiticity_deviation(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..n {
        for r in c..n {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// `exp(-i · angle · H)` for a Hermitian `H`; the input is symmetrized first.
pub(crate) fn expm_hermitian(mut h: Matrix, angle: f64) -> Matrix {
    let n = h.nrows();
    if n == 1 {
        let phase = C64::new(0.0, -angle * h[(0, 0)].re).exp();
        return Matrix::from_element(1, 1, phase);
    }
    for c in 0..n {
        h[(c, c)] = C64::new(h[(c, c)].re, 0.0);
        for r in (c + 1)..n {
            let v = (h[(r, c)] + h[(c, r)].conj()) * 0.5;
            h[(r, c)] = v;
            h[(c, r)] = v.conj();
        }
    }
    let eig = SymmetricEigen::new(h);
    let vecs = eig.eigenvectors;
    let mut scaled = vecs.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::new(0.0, -angle * lambda).exp();
        for v in scaled.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    scaled * vecs.adjoint()
}

/// Left-multiplies `m` by a 2×2 unitary acting on the qubit with bit mask `bit`.
pub(crate) fn apply_local_left(m: &mut Matrix, bit: usize, u: &Matrix2<C64>) {
    let dim = m.nrows();
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for c in 0..m.ncols() {
            let a = m[(r0, c)];
            let b = m[(r1, c)];
            m[(r0, c)] = u[(0, 0)] * a + u[(0, 1)] * b;
            m[(r1, c)] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
}

/// Right-multiplies `m` by a 2×2 unitary acting on the qubit with bit mask `bit`.
pub(crate) fn apply_local_right(m: &mut Matrix, bit: usize, u: &Matrix2<C64>) {
    let dim = m.ncols();
    for c0 in (0..dim).filter(|c| c & bit == 0) {
        let c1 = c0 | bit;
        for r in 0..m.nrows() {
            let a = m[(r, c0)];
            let b = m[(r, c1)];
            m[(r, c0)] = a * u[(0, 0)] + b * u[(1, 0)];
            m[(r, c1)] = a * u[(0, 1)] + b * u[(1, 1)];
        }
    }
}
