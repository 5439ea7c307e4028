//! Spin-1/2 generators, additive Hamiltonians and exact unitary evolution.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{eig_hermitian, pauli, tensor_all, CMatrix, DensityMatrix, Spectrum};
use crate::tolerance::Tolerances;

/// Largest register handled by [`additive_hamiltonian`].
pub const MAX_SITES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinAxis {
    X,
    Y,
    Z,
}

impl SpinAxis {
    pub const ALL: [SpinAxis; 3] = [SpinAxis::X, SpinAxis::Y, SpinAxis::Z];

    pub fn pauli(self) -> CMatrix {
        match self {
            SpinAxis::X => pauli::x(),
            SpinAxis::Y => pauli::y(),
            SpinAxis::Z => pauli::z(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpinAxis::X => "x",
            SpinAxis::Y => "y",
            SpinAxis::Z => "z",
        }
    }
}

impl fmt::Display for SpinAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpinAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(SpinAxis::X),
            "y" => Ok(SpinAxis::Y),
            "z" => Ok(SpinAxis::Z),
            other => Err(Error::invalid(format!("unknown spin axis `{other}`"))),
        }
    }
}

/// Half-Pauli generator with eigenvalues `+1/2` and `-1/2`.
pub fn spin_half(axis: SpinAxis) -> CMatrix {
    axis.pauli().scale(0.5)
}

/// `H_n = sum_i I (x) .. (x) h_i (x) .. (x) I` on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveHamiltonian {
    n: usize,
    local: CMatrix,
    total: CMatrix,
}

impl AdditiveHamiltonian {
    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn local(&self) -> &CMatrix {
        &self.local
    }

    pub fn total(&self) -> &CMatrix {
        &self.total
    }

    pub fn into_total(self) -> CMatrix {
        self.total
    }

    /// `exp(-i h t)` on every site; equal to `exp(-i H_n t)` because the
    /// local terms commute.
    pub fn local_unitary(&self, t: f64) -> Result<CMatrix> {
        let u = unitary_of(&self.local, t)?;
        Ok(tensor_all(&vec![u; self.n]))
    }
}

pub fn additive_hamiltonian(h: &CMatrix, n: usize) -> Result<AdditiveHamiltonian> {
    if h.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h.dim(),
        });
    }
    if !(1..=MAX_SITES).contains(&n) {
        return Err(Error::invalid(format!(
            "number of sites {n} outside 1..={MAX_SITES}"
        )));
    }
    h.ensure_hermitian(Tolerances::DEFAULT.validation)?;
    let dim = 1usize << n;
    let mut total = CMatrix::zeros(dim);
    let id = CMatrix::identity(2);
    for site in 0..n {
        let factors: Vec<CMatrix> = (0..n)
            .map(|k| if k == site { h.clone() } else { id.clone() })
            .collect();
        total = &total + &tensor_all(&factors);
    }
    Ok(AdditiveHamiltonian {
        n,
        local: h.clone(),
        total,
    })
}

/// Two-qubit `H_2` built from `spin_half(axis)`.
pub fn spin_hamiltonian(axis: SpinAxis, n: usize) -> Result<AdditiveHamiltonian> {
    additive_hamiltonian(&spin_half(axis), n)
}

/// `exp(-i H t)` via the spectral decomposition of `H`.
pub fn unitary_of(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let spectrum = eig_hermitian(h)?;
    Ok(unitary_from_spectrum(&spectrum, t))
}

pub(crate) fn unitary_from_spectrum(spectrum: &Spectrum, t: f64) -> CMatrix {
    spectrum.map(|e| Complex64::from_polar(1.0, -e * t))
}

/// `U rho U^dagger`.
pub fn evolve(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    rho.matrix().ensure_same_dim(u)?;
    u.ensure_unitary(Tolerances::DEFAULT.unitarity)?;
    let mat = rho.matrix().conjugate_by(u).hermitian_part();
    Ok(DensityMatrix::from_trusted(mat, None))
}
