//! Complex Hermitian linear algebra and validated quantum-state types.

mod matrix;
pub mod pauli;
mod spectrum;
mod state;

pub use matrix::{
    partial_trace, permute_subsystems, tensor, tensor_all, tensor_vec, CMatrix, MatrixJson,
};
pub use spectrum::{eig_hermitian, eig_hermitian_with, psd_inverse_sqrt, psd_sqrt, Spectrum};
pub use state::{
    fidelity_pure, hs_overlap, trace_distance, BellState, DensityMatrix, PureState, RepairReport,
};

pub use num_complex::Complex64;
