//! Dense complex linear algebra on small (≤ 32-dimensional) operators.

mod eig;
mod matrix;
pub mod paulis;
mod state;

pub use eig::{eig_hermitian, eig_hermitian_from, project_psd, HermitianEigen};
pub use matrix::{frobenius_distance_up_to_phase, partial_trace, tensor, tensor_all, tensor_vec, ComplexMatrix};
pub use state::{choi, choi_checked, choi_from_definition, validation_tol, StateVector, Unitary2};
pub(crate) use state::{inner, norm};
