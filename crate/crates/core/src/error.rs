use thiserror::Error;

use crate::operator::{DenseOperator, Site};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit register must contain at least one site")]
    EmptyRegister,
    #[error("register of {0} qubits exceeds the dense-simulation limit")]
    RegisterTooLarge(usize),
    #[error("site {0} appears more than once")]
    DuplicateSite(Site),
    #[error("site {0} is not part of the register")]
    UnknownSite(Site),
    #[error("operator dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operators belong to different registers")]
    RegisterMismatch,
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("time {t} is outside the support [{start}, {end}]")]
    OutOfSupport { t: f64, start: f64, end: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("edge {0}-{1} is listed more than once")]
    DuplicateEdge(Site, Site),
    #[error("segment {segment} is outside 1..={count}")]
    SegmentOutOfRange { segment: usize, count: usize },
    #[error("error cumulant has no zero in the bracket; smallest value {min_value:.3e} at gamma = {min_gamma:.4}")]
    NoRoot { min_gamma: f64, min_value: f64 },
    #[error("k-selection needs at least one candidate")]
    EmptyCandidates,
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("gate site sets overlap at {0}")]
    OverlappingGates(Site),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("quadrature did not reach tolerance (estimated error {error:.3e})")]
    Quadrature { error: f64 },
    #[error("propagation did not converge: step-halving changed the unitary by {difference:.3e}")]
    UnitaryNotConverged { coarse: Box<DenseOperator>, fine: Box<DenseOperator>, difference: f64 },
    #[error("propagation did not converge: fidelity {coarse:.12} vs {fine:.12} under step halving")]
    FidelityNotConverged { coarse: f64, fine: f64, difference: f64 },
}
