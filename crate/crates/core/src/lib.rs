//! Upper bounds on the global fidelity of state-dependent `M -> N` cloning of
//! real qubit states, and a numerical optimizer for the true optimum.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*F64` and `*F32`
//! aliases below fix the scalar.

pub mod bounds;
pub mod error;
pub mod gram;
pub mod optimizer;
pub mod scalar;
pub mod spherical;

pub use bounds::{
    bound_report, BoundEntry, BoundKind, BoundOptions, BoundReport, Partition, Validity,
};
pub use error::{Error, Result};
pub use gram::{CloneTask, FactorMatrix, GramMatrix, StateSet};
pub use optimizer::{optimal_fidelity, ClonerSolution, OptimizerOptions};
pub use scalar::Real;

pub type GramMatrixF64 = GramMatrix<f64>;
pub type StateSetF64 = StateSet<f64>;
pub type CloneTaskF64 = CloneTask<f64>;
pub type BoundReportF64 = BoundReport<f64>;
pub type ClonerSolutionF64 = ClonerSolution<f64>;

pub type GramMatrixF32 = GramMatrix<f32>;
pub type StateSetF32 = StateSet<f32>;
pub type CloneTaskF32 = CloneTask<f32>;
pub type BoundReportF32 = BoundReport<f32>;
pub type ClonerSolutionF32 = ClonerSolution<f32>;
