//! Speed-of-evolution witnesses for asymmetry and metrologically useful
//! entanglement.
//!
//! The squared speed `S_tau = (Tr rho^2 - Tr(rho U rho U^dagger)) / tau^2` of a
//! state under `U = exp(-i H tau)` lower-bounds the SLD quantum Fisher
//! information, and for an `n`-qubit probe under an additive spin-1/2
//! Hamiltonian `S_tau > n/4` witnesses entanglement useful for phase
//! estimation. Both terms are swap-operator expectations on two copies, which
//! factor into local Bell-singlet projections.
//!
//! Modules, bottom up:
//!
//! - [`qcore`]: complex matrices, Hermitian spectra, validated states.
//! - [`dynamics`]: spin-1/2 generators, additive Hamiltonians, unitary evolution.
//! - [`fisher`]: the quantum Fisher information family, SLDF and variance.
//! - [`speed`]: speed functionals, the witness and the depolarized-state bounds.
//! - [`swapnet`]: two-copy Bell-measurement network with Poisson counting.
//! - [`tomography`]: iterative maximum-likelihood state and detector tomography.
//! - [`waveplate`]: QWP-HWP-QWP synthesis of single-qubit gates.
//! - [`cli`]: experiment configuration, commands and reports.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fisher;
pub mod fixtures;
pub mod parallel;
pub mod qcore;
pub mod speed;
pub mod swapnet;
pub mod tolerance;
pub mod tomography;
pub mod waveplate;

pub use error::{Error, Result};
pub use tolerance::Tolerances;

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
