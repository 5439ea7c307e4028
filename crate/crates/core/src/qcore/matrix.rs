//! Dense complex square matrices and the subsystem operations built on them.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `dim x dim` complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        CMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        CMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        CMatrix(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from `dim * dim` entries in row-major order.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(CMatrix(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_inner(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() || inner.nrows() == 0 {
            return Err(Error::invalid(format!(
                "matrix must be square and non-empty, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        Ok(CMatrix(inner))
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = CMatrix::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.0[(i, i)] = Complex64::new(*v, 0.0);
        }
        m
    }

    /// Projector-like outer product `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        CMatrix::outer_pair(v, v)
    }

    /// `|a><b|`.
    pub fn outer_pair(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len());
        CMatrix::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let d = self.dim();
        (0..d * d).map(|k| self.0[(k / d, k % d)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        CMatrix(self.0.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        CMatrix(self.0.map(|z| z * factor))
    }

    /// Elementwise map, used for noise models acting entry by entry.
    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        CMatrix::from_fn(self.dim(), |i, j| f(i, j, self.0[(i, j)]))
    }

    /// Largest entry modulus, the `||.||_inf` used throughout for tolerances.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let product = CMatrix(&self.0 * self.0.adjoint());
        product.max_abs_diff(&CMatrix::identity(self.dim()))
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    pub fn ensure_same_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        CMatrix((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<v|M|v>`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mv = self.apply(v);
        v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// `<a|M|b>`.
    pub fn matrix_element(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let mb = self.apply(b);
        a.iter().zip(mb.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.0[(i, j)] * other.0[(j, i)];
            }
        }
        acc
    }

    /// `U M U^dagger`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        CMatrix(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn commutator(&self, other: &CMatrix) -> Self {
        CMatrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn powi(&self, exponent: u32) -> Self {
        let mut out = CMatrix::identity(self.dim());
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, index: (usize, usize)) -> &Complex64 {
        &self.0[index]
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        CMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Kronecker product with the first factor's index major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a non-empty list of factors, left to right.
pub fn tensor_all(factors: &[CMatrix]) -> CMatrix {
    let (first, rest) = factors.split_first().expect("at least one factor");
    rest.iter().fold(first.clone(), |acc, f| tensor(&acc, f))
}

/// Kronecker product of state vectors.
pub fn tensor_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid("subsystem dimensions must be positive"));
    }
    let product: usize = dims.iter().product();
    if product != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: product,
        });
    }
    Ok(())
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems stay in
/// their original order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::invalid(format!(
            "subsystem index {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let full_strides = strides(dims);
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product::<usize>().max(1);
    let traced_dim: usize = traced_dims.iter().product::<usize>().max(1);

    // Offsets into the full index contributed by each kept / traced multi-index.
    let offsets = |subs: &[usize], sub_dims: &[usize], count: usize| -> Vec<usize> {
        let sub_strides = strides(sub_dims);
        (0..count)
            .map(|flat| {
                subs.iter()
                    .enumerate()
                    .map(|(pos, &k)| ((flat / sub_strides[pos]) % sub_dims[pos]) * full_strides[k])
                    .sum()
            })
            .collect()
    };
    let kept_off = if kept.is_empty() {
        vec![0]
    } else {
        offsets(&kept, &kept_dims, out_dim)
    };
    let traced_off = if traced.is_empty() {
        vec![0]
    } else {
        offsets(&traced, &traced_dims, traced_dim)
    };

    Ok(CMatrix::from_fn(out_dim, |r, c| {
        traced_off
            .iter()
            .map(|t| m.0[(kept_off[r] + t, kept_off[c] + t)])
            .sum()
    }))
}

/// Reorders tensor factors: subsystem `k` of the output is subsystem
/// `order[k]` of the input.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], order: &[usize]) -> Result<CMatrix> {
    check_dims(m, dims)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::invalid(format!(
            "{order:?} is not a permutation of {} subsystems",
            dims.len()
        )));
    }
    let index_map = permutation_index_map(dims, order);
    let d = m.dim();
    Ok(CMatrix::from_fn(d, |r, c| {
        m.0[(index_map[r], index_map[c])]
    }))
}

/// Maps each output basis index to the corresponding input basis index.
fn permutation_index_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let out_strides = strides(&out_dims);
    let total: usize = dims.iter().product();
    (0..total)
        .map(|flat| {
            order
                .iter()
                .enumerate()
                .map(|(pos, &k)| ((flat / out_strides[pos]) % out_dims[pos]) * in_strides[k])
                .sum()
        })
        .collect()
}

/// Wire format for matrices: `{"dim": n, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<CMatrix> for MatrixJson {
    fn from(m: CMatrix) -> Self {
        MatrixJson::from(&m)
    }
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let d = m.dim();
        MatrixJson {
            dim: d,
            re: (0..d)
                .map(|i| (0..d).map(|j| m.0[(i, j)].re).collect())
                .collect(),
            im: (0..d)
                .map(|i| (0..d).map(|j| m.0[(i, j)].im).collect())
                .collect(),
        }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        let d = json.dim;
        if d == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&json.re) || !shape_ok(&json.im) {
            return Err(Error::invalid(format!(
                "matrix JSON rows do not match dim = {d}"
            )));
        }
        Ok(CMatrix::from_fn(d, |i, j| {
            Complex64::new(json.re[i][j], json.im[i][j])
        }))
    }
}

impl CMatrix {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CMatrix::from_json_str(&text)
    }

    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::pauli;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor(&CMatrix::identity(2), &CMatrix::identity(2));
        assert_eq!(i4, CMatrix::identity(4));
    }

    #[test]
    fn sigma_z_tensor_identity_is_diagonal() {
        let m = tensor(&pauli::z(), &CMatrix::identity(2));
        assert!(m.max_abs_diff(&CMatrix::diagonal(&[1.0, 1.0, -1.0, -1.0])) < 1e-15);
    }

    #[test]
    fn projector_tensor_places_block_top_left() {
        let p0 = CMatrix::diagonal(&[1.0, 0.0]);
        let m = tensor(&p0, &pauli::x());
        let expected = CMatrix::from_row_major(
            4,
            &[
                c(0.0),
                c(1.0),
                c(0.0),
                c(0.0),
                c(1.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
                c(0.0),
            ],
        )
        .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 3], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace(&m, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = CMatrix::diagonal(&[0.25, 0.75]);
        let b = CMatrix::from_row_major(2, &[c(0.5), c(0.5), c(0.5), c(0.5)]).unwrap();
        let ab = tensor(&a, &b);
        assert!(partial_trace(&ab, &[2, 2], &[0]).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(partial_trace(&ab, &[2, 2], &[1]).unwrap().max_abs_diff(&b) < 1e-15);
        let all = partial_trace(&ab, &[2, 2], &[]).unwrap();
        assert_eq!(all.dim(), 1);
        assert!((all.get(0, 0) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = pauli::x();
        let b = pauli::z();
        let ab = tensor(&a, &b);
        let ba = permute_subsystems(&ab, &[2, 2], &[1, 0]).unwrap();
        assert_eq!(ba, tensor(&b, &a));
        assert!(permute_subsystems(&ab, &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn permutation_of_unequal_dims() {
        let a = CMatrix::diagonal(&[1.0, 2.0]);
        let b = CMatrix::diagonal(&[3.0, 5.0, 7.0]);
        let ab = tensor(&a, &b);
        let ba = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert_eq!(ba, tensor(&b, &a));
    }

    #[test]
    fn json_round_trip_and_shape_check() {
        let m = pauli::y();
        let text = m.to_json_string().unwrap();
        assert!(text.contains("\"dim\": 2"));
        assert_eq!(CMatrix::from_json_str(&text).unwrap(), m);
        let bad = r#"{"dim": 2, "re": [[1.0, 0.0]], "im": [[0.0, 0.0]]}"#;
        assert!(CMatrix::from_json_str(bad).is_err());
    }
}
