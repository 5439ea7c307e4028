//! Hermitian eigendecomposition with a deterministic ordering and phase convention.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::CMatrix;
use crate::error::Result;
use crate::tolerance::Tolerances;

/// Components smaller than this are skipped when picking the phase reference.
const PHASE_REFERENCE_FLOOR: f64 = 1e-8;

/// Eigenvalues sorted descending with orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl Spectrum {
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: CMatrix) -> Self {
        debug_assert_eq!(eigenvalues.len(), eigenvectors.dim());
        Spectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// The `k`-th eigenvector.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| self.eigenvectors.get(i, k))
            .collect()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `sum_k f(lambda_k) |k><k|`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let d = self.len();
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(d, |i, j| {
            (0..d)
                .map(|k| {
                    weights[k] * self.eigenvectors.get(i, k) * self.eigenvectors.get(j, k).conj()
                })
                .sum()
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|l| Complex64::new(l, 0.0))
    }

    /// Matrix elements `<i|A|j>` in the eigenbasis.
    pub fn in_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        let v = &self.eigenvectors;
        &(&v.adjoint() * a) * v
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        (&v.adjoint() * v).max_abs_diff(&CMatrix::identity(self.len()))
    }
}

/// Diagonalizes a Hermitian matrix using the default validation tolerance.
pub fn eig_hermitian(m: &CMatrix) -> Result<Spectrum> {
    eig_hermitian_with(m, Tolerances::DEFAULT.validation)
}

/// Diagonalizes a Hermitian matrix, rejecting inputs whose Hermiticity
/// deviation exceeds `tol`.
///
/// Eigenvalues come out descending. Each eigenvector is rescaled so its first
/// non-negligible component is real and positive; eigenvectors sharing an
/// eigenvalue are ordered lexicographically by their components.
pub fn eig_hermitian_with(m: &CMatrix, tol: f64) -> Result<Spectrum> {
    m.ensure_hermitian(tol)?;
    let d = m.dim();
    let eig = m.hermitian_part().into_inner().symmetric_eigen();

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            fix_phase(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();

    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Within runs of numerically equal eigenvalues, order by the vectors.
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (pairs[end - 1].0 - pairs[end].0).abs() <= Tolerances::DEFAULT.degeneracy {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lexicographic_desc(&a.1, &b.1));
        start = end;
    }

    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = CMatrix::from_fn(d, |i, k| pairs[k].1[i]);
    Ok(Spectrum::from_parts(eigenvalues, eigenvectors))
}

fn fix_phase(v: &mut [Complex64]) {
    if let Some(reference) = v.iter().find(|z| z.norm() > PHASE_REFERENCE_FLOOR) {
        let phase = reference.conj() / reference.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lexicographic_desc(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Principal square root of a positive semidefinite matrix. Negative
/// eigenvalues (numerical noise or slightly non-positive fixtures) are clipped.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let spectrum = eig_hermitian_with(m, Tolerances::DEFAULT.reconstruction)?;
    Ok(spectrum.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Inverse square root on the support of a positive matrix; eigenvalues at or
/// below `floor` map to zero.
pub fn psd_inverse_sqrt(m: &CMatrix, floor: f64) -> Result<CMatrix> {
    let spectrum = eig_hermitian_with(m, Tolerances::DEFAULT.reconstruction)?;
    Ok(spectrum.map(|l| {
        if l > floor {
            Complex64::new(1.0 / l.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::qcore::{pauli, BellState, DensityMatrix};

    fn assert_vec_close(a: &[Complex64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - Complex64::new(*y, 0.0)).norm() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn diagonal_matrix() {
        let s = eig_hermitian(&CMatrix::diagonal(&[0.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 0.0]);
        assert_vec_close(&s.vector(0), &[0.0, 1.0], 1e-15);
        assert_vec_close(&s.vector(1), &[1.0, 0.0], 1e-15);
        let s = eig_hermitian(&CMatrix::diagonal(&[1.0, 0.0])).unwrap();
        assert_vec_close(&s.vector(0), &[1.0, 0.0], 1e-15);
        assert_vec_close(&s.vector(1), &[0.0, 1.0], 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let s = eig_hermitian(&pauli::x()).unwrap();
        assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] + 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_vec_close(&s.vector(0), &[r, r], 1e-14);
        assert_vec_close(&s.vector(1), &[r, -r], 1e-14);
    }

    #[test]
    fn degenerate_identity_orders_basis_vectors() {
        let s = eig_hermitian(&CMatrix::identity(3)).unwrap();
        assert_vec_close(&s.vector(0), &[1.0, 0.0, 0.0], 1e-15);
        assert_vec_close(&s.vector(2), &[0.0, 0.0, 1.0], 1e-15);
    }

    #[test]
    fn bell_mixture_spectrum() {
        // rho_p = p |phi+><phi+| + (1-p) |phi-><phi-| at p = 0.3.
        let p = 0.3;
        let rho = DensityMatrix::mixture(&[
            (p, &BellState::PhiPlus.density()),
            (1.0 - p, &BellState::PhiMinus.density()),
        ])
        .unwrap();
        let s = eig_hermitian(rho.matrix()).unwrap();
        let expected = [0.7, 0.3, 0.0, 0.0];
        for (a, b) in s.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_vec_close(&s.vector(0), &[r, 0.0, 0.0, -r], 1e-14);
        assert_vec_close(&s.vector(1), &[r, 0.0, 0.0, r], 1e-14);
        // Independent check: rho |phi+> = 0.3 |phi+>.
        let phi_plus = BellState::PhiPlus.state();
        let image = rho.matrix().apply(phi_plus.amplitudes());
        for (x, y) in image.iter().zip(phi_plus.amplitudes()) {
            assert!((x - y * 0.3).norm() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_input_names_deviation() {
        let mut m = CMatrix::identity(2);
        m.set(0, 1, Complex64::new(1e-3, 0.0));
        match eig_hermitian(&m) {
            Err(Error::NotHermitian { deviation }) => assert!((deviation - 1e-3).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let rho = BellState::PsiMinus
            .density()
            .mixed_with_white_noise(0.3)
            .unwrap();
        let root = psd_sqrt(rho.matrix()).unwrap();
        assert!((&root * &root).max_abs_diff(rho.matrix()) < 1e-12);
    }
}
