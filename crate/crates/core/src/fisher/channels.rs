//! Channels commuting with `U_t = exp(-i H t)`, and the flagged-ensemble embedding.

use num_complex::Complex64;

use crate::dynamics::{evolve, unitary_from_spectrum};
use crate::error::{Error, Result};
use crate::qcore::{eig_hermitian, tensor, CMatrix, DensityMatrix};

/// Eigenvalues of `H` closer than this share a spectral projector.
const EIGENSPACE_TOL: f64 = 1e-9;

/// Channel covariant with the unitary family generated by a fixed `H`.
#[derive(Clone, Debug, PartialEq)]
pub enum CovariantChannel {
    /// `(1 - q) rho + q sum_E P_E rho P_E` with `P_E` the spectral projectors of `H`.
    Dephasing { strength: f64 },
    /// `exp(-i H t) rho exp(i H t)`.
    Evolution { t: f64 },
    /// Convex combination of covariant channels.
    Mixture(Vec<(f64, CovariantChannel)>),
}

impl CovariantChannel {
    pub fn apply(&self, rho: &DensityMatrix, h: &CMatrix) -> Result<DensityMatrix> {
        rho.matrix().ensure_same_dim(h)?;
        match self {
            CovariantChannel::Dephasing { strength } => {
                if !(0.0..=1.0).contains(strength) {
                    return Err(Error::invalid(format!(
                        "dephasing strength {strength} outside [0, 1]"
                    )));
                }
                let dephased = full_dephasing(rho.matrix(), h)?;
                let mat = &rho.matrix().scale(1.0 - strength) + &dephased.scale(*strength);
                DensityMatrix::new(mat.hermitian_part())
            }
            CovariantChannel::Evolution { t } => {
                let spectrum = eig_hermitian(h)?;
                evolve(rho, &unitary_from_spectrum(&spectrum, *t))
            }
            CovariantChannel::Mixture(parts) => {
                let outputs = parts
                    .iter()
                    .map(|(w, ch)| Ok((*w, ch.apply(rho, h)?)))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<(f64, &DensityMatrix)> =
                    outputs.iter().map(|(w, r)| (*w, r)).collect();
                DensityMatrix::mixture(&refs)
            }
        }
    }
}

fn full_dephasing(rho: &CMatrix, h: &CMatrix) -> Result<CMatrix> {
    let spectrum = eig_hermitian(h)?;
    let values = spectrum.eigenvalues();
    let mut out = CMatrix::zeros(rho.dim());
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end - 1] - values[end]).abs() <= EIGENSPACE_TOL {
            end += 1;
        }
        let projector = (start..end).fold(CMatrix::zeros(rho.dim()), |acc, k| {
            &acc + &CMatrix::outer(&spectrum.vector(k))
        });
        out = &out + &(&(&projector * rho) * &projector);
        start = end;
    }
    Ok(out)
}

/// Builds `sum_mu p_mu rho_mu (x) |mu><mu|` together with `H (x) I`.
pub fn block_ensemble(
    ensemble: &[(f64, DensityMatrix)],
    h: &CMatrix,
) -> Result<(DensityMatrix, CMatrix)> {
    let m = ensemble.len();
    if m == 0 {
        return Err(Error::invalid("ensemble must be non-empty"));
    }
    let flagged: Vec<(f64, DensityMatrix)> = ensemble
        .iter()
        .enumerate()
        .map(|(mu, (p, rho))| {
            let mut flag = CMatrix::zeros(m);
            flag.set(mu, mu, Complex64::new(1.0, 0.0));
            let flag = DensityMatrix::new(flag).expect("basis projector is a state");
            (*p, rho.tensor(&flag))
        })
        .collect();
    let refs: Vec<(f64, &DensityMatrix)> = flagged.iter().map(|(p, r)| (*p, r)).collect();
    Ok((
        DensityMatrix::mixture(&refs)?,
        tensor(h, &CMatrix::identity(m)),
    ))
}
