//! Entanglement witnesses and the Hilbert-Schmidt measure of entanglement
//! for bipartite `d_a x d_b` quantum states.
//!
//! * [`linalg`]: dense complex matrices, Hermitian eigensolver, partial transpose.
//! * [`bases`]: Pauli, Gell-Mann and generalized Gell-Mann generators; Bloch decompositions.
//! * [`states`]: density matrices, isotropic states, product ensembles, PPT.
//! * [`witness`]: hyperplane witnesses, minimization over product states, CHSH.
//! * [`measures`]: nearest separable state, GBI violation, measure/violation equality.

pub mod bases;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod report;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianOperator};
pub use measures::{MeasureResult, ProjectionConfig};
pub use states::{DensityMatrix, IsotropicParams, ProductEnsemble};
pub use witness::SolverConfig;
