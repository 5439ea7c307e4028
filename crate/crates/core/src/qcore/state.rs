//! Validated quantum states.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::matrix::{partial_trace, tensor, tensor_vec};
use super::spectrum::{eig_hermitian_with, Spectrum};
use super::CMatrix;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state vector must be non-empty"));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > Tolerances::DEFAULT.normalization {
            return Err(Error::NotNormalized { norm });
        }
        Ok(PureState { amplitudes })
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(PureState {
            amplitudes: amplitudes.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn product(factors: &[PureState]) -> Self {
        let (first, rest) = factors.split_first().expect("at least one factor");
        let amplitudes = rest.iter().fold(first.amplitudes.clone(), |acc, f| {
            tensor_vec(&acc, &f.amplitudes)
        });
        PureState { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> CMatrix {
        CMatrix::outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn evolve(&self, u: &CMatrix) -> PureState {
        PureState {
            amplitudes: u.apply(&self.amplitudes),
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// The four two-qubit Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        BellState::ALL.into_iter().find(|b| b.label() == label)
    }

    pub fn state(self) -> PureState {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let amplitudes = match self {
            BellState::PhiPlus => vec![r, z, z, r],
            BellState::PhiMinus => vec![r, z, z, -r],
            BellState::PsiPlus => vec![z, r, r, z],
            BellState::PsiMinus => vec![z, r, -r, z],
        };
        PureState { amplitudes }
    }

    pub fn projector(self) -> CMatrix {
        self.state().projector()
    }

    pub fn density(self) -> DensityMatrix {
        self.state().density()
    }
}

/// Outcome of [`DensityMatrix::repair`]: how far the raw matrix was from a state.
#[derive(Clone, Debug, PartialEq)]
pub struct RepairReport {
    pub hermiticity_deviation: f64,
    pub trace_before: f64,
    pub min_eigenvalue_before: f64,
    /// Total weight of the negative eigenvalues that were clipped.
    pub clipped_weight: f64,
}

/// Hermitian, unit-trace, positive semidefinite matrix.
///
/// The spectrum is computed at most once and cached; clones share nothing and
/// recompute an identical spectrum on demand.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        DensityMatrix::with_tolerances(mat, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        mat.ensure_hermitian(tol.validation)?;
        check_trace(&mat, tol.validation)?;
        let spectrum = eig_hermitian_with(&mat, tol.validation)?;
        let min_eigenvalue = spectrum.min_eigenvalue();
        if min_eigenvalue < -tol.validation {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityMatrix {
            mat,
            spectrum: OnceLock::from(spectrum),
        })
    }

    /// Projects an approximately valid matrix onto the state space: takes the
    /// Hermitian part, clips negative eigenvalues and renormalizes the trace.
    /// Always explicit; no constructor repairs silently.
    pub fn repair(mat: &CMatrix) -> Result<(Self, RepairReport)> {
        let hermiticity_deviation = mat.hermiticity_deviation();
        let h = mat.hermitian_part();
        let trace_before = h.trace().re;
        let spectrum = eig_hermitian_with(&h, f64::INFINITY)?;
        let min_eigenvalue_before = spectrum.min_eigenvalue();
        let clipped_weight: f64 = spectrum
            .eigenvalues()
            .iter()
            .filter(|&&l| l < 0.0)
            .map(|l| -l)
            .sum();
        let kept: f64 = spectrum.eigenvalues().iter().map(|l| l.max(0.0)).sum();
        if kept <= 0.0 {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eigenvalue_before,
            });
        }
        let eigenvalues: Vec<f64> = spectrum
            .eigenvalues()
            .iter()
            .map(|l| l.max(0.0) / kept)
            .collect();
        let repaired = Spectrum::from_parts(eigenvalues, spectrum.eigenvectors().clone());
        let state = DensityMatrix {
            mat: repaired.reconstruct().hermitian_part(),
            spectrum: OnceLock::from(repaired),
        };
        Ok((
            state,
            RepairReport {
                hermiticity_deviation,
                trace_before,
                min_eigenvalue_before,
                clipped_weight,
            },
        ))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            mat: psi.projector(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            mat: CMatrix::identity(dim).scale(1.0 / dim as f64),
            spectrum: OnceLock::new(),
        }
    }

    /// Convex combination `sum_k w_k rho_k`. Weights must be non-negative and
    /// sum to one.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| Error::invalid("mixture needs at least one component"))?
            .1
            .dim();
        let mut total = 0.0;
        let mut mat = CMatrix::zeros(dim);
        for (w, rho) in terms {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::invalid(format!("mixture weight {w} is negative")));
            }
            same_dim(dim, rho.dim())?;
            total += w;
            mat = &mat + &rho.mat.scale(*w);
        }
        if (total - 1.0).abs() > Tolerances::DEFAULT.validation {
            return Err(Error::invalid(format!("mixture weights sum to {total}")));
        }
        Ok(DensityMatrix {
            mat,
            spectrum: OnceLock::new(),
        })
    }

    /// `(1 - eps) rho + eps I/d`.
    pub fn mixed_with_white_noise(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::invalid(format!("noise weight {eps} outside [0, 1]")));
        }
        let noise = DensityMatrix::maximally_mixed(self.dim());
        DensityMatrix::mixture(&[(1.0 - eps, self), (eps, &noise)])
    }

    /// For matrices known to be valid by construction (e.g. unitary images).
    pub(crate) fn from_trusted(mat: CMatrix, spectrum: Option<Spectrum>) -> Self {
        DensityMatrix {
            mat,
            spectrum: spectrum.map(OnceLock::from).unwrap_or_default(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            eig_hermitian_with(&self.mat, f64::INFINITY).expect("density matrix is Hermitian")
        })
    }

    /// Eigenvalues with numerical negatives in `[-tol, 0)` clipped to zero.
    pub fn clipped_eigenvalues(&self) -> Vec<f64> {
        self.spectrum()
            .eigenvalues()
            .iter()
            .map(|&l| l.max(0.0))
            .collect()
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            mat: tensor(&self.mat, &other.mat),
            spectrum: OnceLock::new(),
        }
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            mat: partial_trace(&self.mat, dims, keep)?,
            spectrum: OnceLock::new(),
        })
    }

    pub fn expectation(&self, observable: &CMatrix) -> Result<f64> {
        self.mat.ensure_same_dim(observable)?;
        Ok(self.mat.trace_product(observable).re)
    }
}

fn check_trace(mat: &CMatrix, tol: f64) -> Result<()> {
    let trace = mat.trace();
    if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
        return Err(Error::TraceNotOne { trace: trace.re });
    }
    Ok(())
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// Hilbert-Schmidt overlap `Tr(rho sigma)`; `hs_overlap(rho, rho)` is the purity.
pub fn hs_overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(rho.mat.trace_product(&sigma.mat).re)
}

/// `<psi|rho|psi>`.
pub fn fidelity_pure(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    same_dim(psi.dim(), rho.dim())?;
    Ok(rho.mat.expectation(psi.amplitudes()).re)
}

/// `(1/2) ||a - b||_1` for Hermitian `a`, `b`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    a.ensure_same_dim(b)?;
    let diff = a - b;
    let spectrum = eig_hermitian_with(&diff, Tolerances::DEFAULT.reconstruction)?;
    Ok(0.5 * spectrum.eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho_p(p: f64) -> DensityMatrix {
        DensityMatrix::mixture(&[
            (p, &BellState::PhiPlus.density()),
            (1.0 - p, &BellState::PhiMinus.density()),
        ])
        .unwrap()
    }

    #[test]
    fn validation_rejects_each_failure_mode() {
        let mut m = CMatrix::diagonal(&[0.5, 0.5]);
        m.set(0, 1, Complex64::new(0.1, 0.0));
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::diagonal(&[0.6, 0.5])),
            Err(Error::TraceNotOne { .. })
        ));
        assert!(matches!(
            DensityMatrix::new(CMatrix::diagonal(&[1.1, -0.1])),
            Err(Error::NotPositive { .. })
        ));
        assert!(DensityMatrix::new(CMatrix::diagonal(&[1.0 + 5e-11, -5e-11])).is_ok());
    }

    #[test]
    fn repair_is_explicit_and_reports() {
        let raw = CMatrix::diagonal(&[0.7, 0.31, -0.01]);
        assert!(DensityMatrix::new(raw.clone()).is_err());
        let (rho, report) = DensityMatrix::repair(&raw).unwrap();
        assert!((report.trace_before - 1.0).abs() < 1e-15);
        assert!((report.clipped_weight - 0.01).abs() < 1e-15);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!(rho.spectrum().min_eigenvalue() >= 0.0);
        assert!((rho.matrix().get(0, 0).re - 0.7 / 1.01).abs() < 1e-14);
    }

    #[test]
    fn pure_state_normalization() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!(matches!(
            PureState::new(vec![c(1.0), c(1.0)]),
            Err(Error::NotNormalized { .. })
        ));
        let psi = PureState::normalized(vec![c(1.0), c(1.0)]).unwrap();
        assert!((psi.inner(&psi).re - 1.0).abs() < 1e-15);
        assert!(PureState::normalized(vec![c(0.0)]).is_err());
    }

    #[test]
    fn hs_overlap_examples() {
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((hs_overlap(&mixed, &mixed).unwrap() - 0.5).abs() < 1e-15);
        // Oracle: orthogonal Bell mixture purity p^2 + (1-p)^2.
        let r = rho_p(0.3);
        assert!((hs_overlap(&r, &r).unwrap() - 0.58).abs() < 1e-14);
        assert!((r.purity() - 0.58).abs() < 1e-14);
        let a = BellState::PhiPlus.density();
        let b = BellState::PhiMinus.density();
        assert!(hs_overlap(&a, &b).unwrap().abs() < 1e-15);
        assert!(matches!(
            hs_overlap(&a, &mixed),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_of_pure_state_with_itself() {
        let psi = BellState::PhiPlus.state();
        assert!((fidelity_pure(&psi, &psi.density()).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity_pure(&psi, &DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let marginal = BellState::PhiPlus
            .density()
            .partial_trace(&[2, 2], &[0])
            .unwrap();
        assert!(
            marginal
                .matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                < 1e-15
        );
        for p in [0.0, 0.3, 0.5, 1.0] {
            let m = rho_p(p).partial_trace(&[2, 2], &[1]).unwrap();
            // Explicit index contraction: (Tr_A rho)_{bc} = sum_a rho_{(a,b),(a,c)}.
            let full = rho_p(p);
            for b in 0..2 {
                for c in 0..2 {
                    let direct: Complex64 = (0..2)
                        .map(|a| full.matrix().get(2 * a + b, 2 * a + c))
                        .sum();
                    assert!((m.matrix().get(b, c) - direct).norm() < 1e-15);
                }
            }
            assert!(
                m.matrix()
                    .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                    < 1e-15
            );
        }
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let a = BellState::PhiPlus.projector();
        let b = BellState::PsiMinus.projector();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a).unwrap() < 1e-14);
    }

    #[test]
    fn spectrum_cache_is_idempotent() {
        let r = rho_p(0.2);
        let first = r.spectrum().clone();
        let copy = r.clone();
        assert_eq!(&first, r.spectrum());
        assert_eq!(&first, copy.spectrum());
    }
}
