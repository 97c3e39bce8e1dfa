//! Weighted interior penalty discontinuous Galerkin discretizations of
//! `-∇·(κ∇u) = f` on `[-1,1]²` with a piecewise-constant, high-contrast `κ`,
//! together with the coefficient-dependent splitting of the piecewise-linear DG
//! space into Crouzeix–Raviart and jump components, and the preconditioners
//! that exploit it: diagonal scaling on the jump block, two-level and BPX
//! additive preconditioners on the Crouzeix–Raviart block, a block-Jacobi
//! preconditioner for the symmetric method, and the symmetric-part iteration
//! for the nonsymmetric methods.

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod mesh;
pub mod precond;
pub mod sparse;
pub mod split;
pub mod verify;

pub use assembly::{DgProblem, MethodParams, Variant};
pub use error::{DgError, Result};
pub use experiments::{ExperimentConfig, TableKind, TableResult};
pub use krylov::{Preconditioner, SolveReport};
pub use mesh::{CoefficientField, EdgeWeights, Mesh, MeshHierarchy};
pub use sparse::{CholeskyFactor, SparseOperator};
pub use split::{BlockOperator, SplitBasis};
