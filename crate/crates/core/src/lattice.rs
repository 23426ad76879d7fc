//! Drive, XY-exchange and static ZZ Hamiltonians on an explicit qubit set.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::{BasisPartition, Hamiltonian};
use crate::operator::{pauli_string_entries, Axis, DenseOperator, Matrix, QubitRegister, Site, C64};
use crate::pulse::Envelope;

/// Resonant drive `Ω(t)(cos φ σˣ + sin φ σʸ)` on one site.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveTerm {
    pub site: Site,
    pub envelope: Envelope,
    pub phase: f64,
}

impl DriveTerm {
    pub fn x(site: Site, envelope: Envelope) -> Self {
        DriveTerm { site, envelope, phase: 0.0 }
    }

    pub fn y(site: Site, envelope: Envelope) -> Self {
        DriveTerm { site, envelope, phase: FRAC_PI_2 }
    }
}

/// Exchange coupling `(J(t)/2)(σˣσˣ + σʸσʸ)` between two sites.
#[derive(Clone, Debug, PartialEq)]
pub struct XyEdge {
    pub a: Site,
    pub b: Site,
    pub envelope: Envelope,
}

impl XyEdge {
    pub fn new(a: Site, b: Site, envelope: Envelope) -> Result<Self> {
        if a == b {
            return Err(Error::DuplicateSite(a));
        }
        Ok(XyEdge { a, b, envelope })
    }
}

/// Static crosstalk `η σᶻσᶻ` between two sites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZzEdge {
    pub a: Site,
    pub b: Site,
    pub strength: f64,
}

impl ZzEdge {
    pub fn new(a: Site, b: Site, strength: f64) -> Result<Self> {
        if a == b {
            return Err(Error::DuplicateSite(a));
        }
        Ok(ZzEdge { a, b, strength })
    }

    fn key(&self) -> (Site, Site) {
        if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        }
    }
}

#[derive(Clone, Debug)]
struct Term {
    envelope: Envelope,
    operator: DenseOperator,
    entries: Vec<(usize, usize, C64)>,
}

impl Term {
    fn new(envelope: Envelope, operator: DenseOperator) -> Self {
        let m = operator.matrix();
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v.norm() > 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        Term { envelope, operator, entries }
    }
}

/// `H(t) = Σ fᵢ(t) Oᵢ` with closed-form envelopes `fᵢ` and Hermitian `Oᵢ`.
#[derive(Clone, Debug)]
pub struct TimeDependentHamiltonian {
    register: Arc<QubitRegister>,
    terms: Vec<Term>,
}

impl TimeDependentHamiltonian {
    pub fn new(register: Arc<QubitRegister>) -> Self {
        TimeDependentHamiltonian { register, terms: Vec::new() }
    }

    pub fn push_term(&mut self, envelope: Envelope, operator: DenseOperator) -> Result<()> {
        if operator.register().as_ref() != self.register.as_ref() {
            return Err(Error::RegisterMismatch);
        }
        let dev = operator.hermiticity_deviation();
        if dev > crate::operator::HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        self.terms.push(Term::new(envelope, operator));
        Ok(())
    }

    pub fn with_term(mut self, envelope: Envelope, operator: DenseOperator) -> Result<Self> {
        self.push_term(envelope, operator)?;
        Ok(self)
    }

    /// Concatenation of both term lists.
    pub fn plus(&self, other: &TimeDependentHamiltonian) -> Result<Self> {
        if other.register.as_ref() != self.register.as_ref() {
            return Err(Error::RegisterMismatch);
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(TimeDependentHamiltonian { register: self.register.clone(), terms })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Envelope, &DenseOperator)> {
        self.terms.iter().map(|t| (&t.envelope, &t.operator))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn into_shared(self) -> Arc<dyn Hamiltonian> {
        Arc::new(self)
    }
}

impl Hamiltonian for TimeDependentHamiltonian {
    fn register(&self) -> &Arc<QubitRegister> {
        &self.register
    }

    fn support_end(&self) -> Option<f64> {
        self.terms.iter().filter_map(|t| t.envelope.support_end()).reduce(f64::min)
    }

    fn shortest_period(&self) -> Option<f64> {
        self.terms.iter().filter_map(|t| t.envelope.shortest_period()).reduce(f64::min)
    }

    fn accumulate(&self, t: f64, out: &mut Matrix) {
        for term in &self.terms {
            let f = term.envelope.value(t);
            if f == 0.0 {
                continue;
            }
            for &(r, c, v) in &term.entries {
                out[(r, c)] += v * f;
            }
        }
    }

    fn connect(&self, partition: &mut BasisPartition) {
        for term in &self.terms {
            for &(r, c, _) in &term.entries {
                if r != c {
                    partition.union(r, c);
                }
            }
        }
    }
}

fn drive_operator(register: &Arc<QubitRegister>, site: Site, phase: f64) -> Result<DenseOperator> {
    let (s, c) = phase.sin_cos();
    let dim = register.dim();
    let mut m = Matrix::zeros(dim, dim);
    for (axis, w) in [(Axis::X, c), (Axis::Y, s)] {
        if w == 0.0 {
            continue;
        }
        for (r, col, v) in pauli_string_entries(register, &[(site, axis)])? {
            m[(r, col)] += v * w;
        }
    }
    DenseOperator::from_matrix(register.clone(), m)
}

/// `Σ Ωᵢ(t)(cos φᵢ σˣᵢ + sin φᵢ σʸᵢ)`.
pub fn build_drive(register: &Arc<QubitRegister>, drives: &[DriveTerm]) -> Result<TimeDependentHamiltonian> {
    let mut h = TimeDependentHamiltonian::new(register.clone());
    for d in drives {
        h.push_term(d.envelope.clone(), drive_operator(register, d.site, d.phase)?)?;
    }
    Ok(h)
}

/// `Σ η σᶻσᶻ` over the edge list; each unordered pair may appear once.
pub fn build_zz(register: &Arc<QubitRegister>, edges: &[ZzEdge]) -> Result<TimeDependentHamiltonian> {
    let mut h = TimeDependentHamiltonian::new(register.clone());
    for (i, e) in edges.iter().enumerate() {
        if edges[..i].iter().any(|o| o.key() == e.key()) {
            return Err(Error::DuplicateEdge(e.a, e.b));
        }
        let op = DenseOperator::product_term(register.clone(), &[(e.a, Axis::Z), (e.b, Axis::Z)])?;
        h.push_term(Envelope::constant(e.strength), op)?;
    }
    Ok(h)
}

/// The exchange operator `(σˣσˣ + σʸσʸ)/2` for one pair.
pub fn exchange_operator(register: &Arc<QubitRegister>, a: Site, b: Site) -> Result<DenseOperator> {
    let xx = DenseOperator::product_term(register.clone(), &[(a, Axis::X), (b, Axis::X)])?;
    let yy = DenseOperator::product_term(register.clone(), &[(a, Axis::Y), (b, Axis::Y)])?;
    Ok((&xx + &yy).scale(0.5))
}

/// `Σ (J(t)/2)(σˣσˣ + σʸσʸ)` over the edge list.
pub fn build_xy(register: &Arc<QubitRegister>, edges: &[XyEdge]) -> Result<TimeDependentHamiltonian> {
    let mut h = TimeDependentHamiltonian::new(register.clone());
    for (i, e) in edges.iter().enumerate() {
        let key = |x: &XyEdge| if x.a <= x.b { (x.a, x.b) } else { (x.b, x.a) };
        if edges[..i].iter().any(|o| key(o) == key(e)) {
            return Err(Error::DuplicateEdge(e.a, e.b));
        }
        h.push_term(e.envelope.clone(), exchange_operator(register, e.a, e.b)?)?;
    }
    Ok(h)
}
