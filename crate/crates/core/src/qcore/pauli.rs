//! Single-qubit Pauli matrices.

use num_complex::Complex64;

use super::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn x() -> CMatrix {
    CMatrix::from_row_major(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn y() -> CMatrix {
    CMatrix::from_row_major(2, &[ZERO, -I, I, ZERO]).unwrap()
}

pub fn z() -> CMatrix {
    CMatrix::diagonal(&[1.0, -1.0])
}
