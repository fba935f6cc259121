//! Truncated multimode bosonic Fock space.

mod basis;
mod sparse;
mod state;
pub mod text;

pub(crate) use basis::same_basis;
pub use basis::{build_basis, Basis, DEFAULT_MAX_DIM};
pub use sparse::{product, ladder, lower, raise, LadderKind, SparseOp};
pub use state::{partial_probability, DensityOp, Ket, Pattern, QuantumState};
