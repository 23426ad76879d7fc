//! Dense simulation of ZZ-crosstalk mitigation by periodic frame
//! transformations on small square-lattice qubit registers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cumulant;
pub mod error;
pub mod frame;
pub mod hamiltonian;
pub mod lattice;
pub mod operator;
pub mod propagator;
pub mod pulse;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};
pub use hamiltonian::{BasisPartition, Hamiltonian, HamiltonianSum};
pub use operator::{trace_fidelity, Axis, DenseOperator, Matrix, QubitRegister, Site, C64};
pub use propagator::{
    gate_fidelity, ideal_gate, FidelityReport, GateLabel, Integrator, PropagatorConfig, Schedule, Step,
};
pub use pulse::{Envelope, PhaseProfile};
pub use scenario::{run_sweep, Scenario, ScenarioKind, ScenarioParams, Scheme, SweepRecord};
