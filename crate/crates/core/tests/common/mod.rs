//! Random inputs shared by the integration tests.
#![allow(dead_code)]

use qspeed::qcore::{CMatrix, Complex64, DensityMatrix, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let a = CMatrix::from_fn(dim, |_, _| gaussian(rng));
    (&a + &a.adjoint()).scale(0.5)
}

/// `G G^dagger / Tr` for a `dim x rank` Ginibre matrix.
pub fn random_state(rng: &mut impl Rng, dim: usize, rank: usize) -> DensityMatrix {
    let cols: Vec<Vec<Complex64>> = (0..rank)
        .map(|_| (0..dim).map(|_| gaussian(rng)).collect())
        .collect();
    let m = cols
        .iter()
        .fold(CMatrix::zeros(dim), |acc, v| &acc + &CMatrix::outer(v));
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr).hermitian_part()).expect("Ginibre state is valid")
}

pub fn random_pure(rng: &mut impl Rng, dim: usize) -> PureState {
    PureState::normalized((0..dim).map(|_| gaussian(rng)).collect()).expect("non-zero vector")
}

/// Full-rank state with a random rank between 1 and `dim`.
pub fn random_mixed(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    random_state(rng, dim, rank)
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix {
    let h = random_hermitian(rng, dim);
    qspeed::dynamics::unitary_of(&h, 1.0).expect("Hermitian generator")
}
