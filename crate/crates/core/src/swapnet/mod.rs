//! Two-copy swap network: overlaps and purities from local Bell-state
//! measurements, sampled as photon counting would see them.

mod effects;
mod protocol;
mod sampling;
mod schedule;

pub use effects::{
    BsmMode, EffectSet, EffectSetJson, NoiseModel, ProjectorSource, PHI_CLASS_LABEL, SINGLET_LABEL,
};
pub use protocol::{run_protocol_point, sample_std, ProtocolConfig, ProtocolPoint, Shots};
pub use sampling::{
    bsm_joint_probs, estimate_from_counts, estimate_from_probs, joint_label, sample_counts,
    sample_counts_with, stream_rng, CountRecord, ProbTable, SamplingMode, SwapEstimate,
    LABEL_SEPARATOR, PAIR_ORDER,
};
pub use schedule::{MixingSchedule, PHI_MINUS_PLATE};

use crate::error::{Error, Result};
use crate::qcore::{permute_subsystems, tensor_all, BellState, CMatrix, DensityMatrix};

pub fn singlet_projector() -> CMatrix {
    BellState::PsiMinus.projector()
}

/// Swap of two qubits, `I - 2 |psi-><psi-|`.
pub fn local_swap() -> CMatrix {
    &CMatrix::identity(4) - &singlet_projector().scale(2.0)
}

/// Wire order taking `(copy 1 sites, copy 2 sites)` to interleaved pairs
/// `(site 0 of both copies, site 1 of both copies, ..)`.
pub fn pair_order(n: usize) -> Vec<usize> {
    (0..n).flat_map(|i| [i, n + i]).collect()
}

/// `Tr(rho sigma)` as the expectation of the product of local swaps on
/// `rho (x) sigma`, for `n`-qubit states.
pub fn overlap_via_swap(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize) -> Result<f64> {
    if n == 0 || n > 5 {
        return Err(Error::invalid(format!("qubit count {n} outside 1..=5")));
    }
    let dim = 1usize << n;
    for state in [rho, sigma] {
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: state.dim(),
            });
        }
    }
    let joint = rho.tensor(sigma);
    let paired = permute_subsystems(joint.matrix(), &vec![2; 2 * n], &pair_order(n))?;
    let swap = tensor_all(&vec![local_swap(); n]);
    Ok(swap.trace_product(&paired).re)
}
