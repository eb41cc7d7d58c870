//! Dense complex matrices, density matrices and Kraus-form channels.

pub mod density;
pub mod matrix;
pub mod sparse;
pub mod superop;

pub use density::{devectorize, is_psd, vectorize, DensityMatrix};
pub use matrix::{dot, inner, Matrix};
pub use sparse::SparseMatrix;
pub use superop::{KrausCheck, KrausOp, Superoperator};
