//! The time-dependent Hamiltonian abstraction shared by term lists, frame
//! pictures and the propagator.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operator::{DenseOperator, Matrix, QubitRegister};
use crate::pulse::check_support;

/// A Hermitian operator-valued function of time on a fixed register.
pub trait Hamiltonian: Send + Sync + fmt::Debug {
    fn register(&self) -> &Arc<QubitRegister>;

    /// End of the support `[0, end]`; `None` when unbounded.
    fn support_end(&self) -> Option<f64>;

    /// Fastest oscillation period present, used to size integration steps.
    fn shortest_period(&self) -> Option<f64>;

    /// Adds `H(t)` into `out`. No support check.
    fn accumulate(&self, t: f64, out: &mut Matrix);

    /// Merges every pair of basis states that `H(t)` can couple for some `t`.
    fn connect(&self, partition: &mut BasisPartition);

    fn evaluate(&self, t: f64) -> Result<DenseOperator> {
        check_support(t, self.support_end())?;
        let dim = self.register().dim();
        let mut m = Matrix::zeros(dim, dim);
        self.accumulate(t, &mut m);
        DenseOperator::from_matrix(self.register().clone(), m)
    }
}

/// Union-find over computational-basis indices. Its components are
/// invariant subspaces of every Hamiltonian that was connected into it.
#[derive(Clone, Debug)]
pub struct BasisPartition {
    parent: Vec<usize>,
}

impl BasisPartition {
    pub fn new(dim: usize) -> Self {
        BasisPartition { parent: (0..dim).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    pub fn connect_matrix(&mut self, m: &Matrix) {
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if r != c && m[(r, c)].norm() > 0.0 {
                    self.union(r, c);
                }
            }
        }
    }

    /// Components as sorted index lists, ordered by their smallest index.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

/// Pointwise sum of Hamiltonians on one register.
#[derive(Clone, Debug)]
pub struct HamiltonianSum {
    register: Arc<QubitRegister>,
    parts: Vec<Arc<dyn Hamiltonian>>,
}

impl HamiltonianSum {
    pub fn new(parts: Vec<Arc<dyn Hamiltonian>>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter("empty Hamiltonian sum".into()))?;
        let register = first.register().clone();
        if parts.iter().any(|p| p.register().as_ref() != register.as_ref()) {
            return Err(Error::RegisterMismatch);
        }
        Ok(HamiltonianSum { register, parts })
    }

    pub fn parts(&self) -> &[Arc<dyn Hamiltonian>] {
        &self.parts
    }
}

impl Hamiltonian for HamiltonianSum {
    fn register(&self) -> &Arc<QubitRegister> {
        &self.register
    }

    fn support_end(&self) -> Option<f64> {
        self.parts.iter().filter_map(|p| p.support_end()).reduce(f64::min)
    }

    fn shortest_period(&self) -> Option<f64> {
        self.parts.iter().filter_map(|p| p.shortest_period()).reduce(f64::min)
    }

    fn accumulate(&self, t: f64, out: &mut Matrix) {
        for p in &self.parts {
            p.accumulate(t, out);
        }
    }

    fn connect(&self, partition: &mut BasisPartition) {
        for p in &self.parts {
            p.connect(partition);
        }
    }
}
