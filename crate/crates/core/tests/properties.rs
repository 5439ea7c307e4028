mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use qspeed::dynamics::{evolve, spin_hamiltonian, unitary_of, SpinAxis};
use qspeed::fisher::{block_ensemble, qfi_f, sldf, variance, CmFunction, CovariantChannel};
use qspeed::qcore::{
    eig_hermitian, hs_overlap, partial_trace, tensor, trace_distance, CMatrix, DensityMatrix,
    PureState,
};
use qspeed::speed::{
    depolarized_sandwich, entanglement_witness, squared_speed_tau, squared_speed_zero,
};
use qspeed::swapnet::{
    bsm_joint_probs, estimate_from_counts, estimate_from_probs, overlap_via_swap,
    sample_counts_with, CountRecord, EffectSet, SamplingMode,
};
use qspeed::tomography::{mle_detector, mle_state, pauli_settings, MleOptions, ProbeSet};
use qspeed::waveplate::{
    decompose, equal_up_to_phase, euler_unitary, hwp, qwp, EulerAngles, JonesConvention,
};

use common::*;

const SLACK: f64 = 1e-9;

fn dims() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8])
}

fn axes() -> impl Strategy<Value = SpinAxis> {
    prop::sample::select(vec![SpinAxis::X, SpinAxis::Y, SpinAxis::Z])
}

fn functions() -> [CmFunction; 2] {
    [CmFunction::sld(), CmFunction::wigner_yanase()]
}

fn random_channel(rng: &mut impl rand::Rng, depth: usize) -> CovariantChannel {
    match rng.random_range(0..if depth == 0 { 2 } else { 3 }) {
        0 => CovariantChannel::Dephasing {
            strength: rng.random_range(0.0..=1.0),
        },
        1 => CovariantChannel::Evolution {
            t: rng.random_range(-3.0..3.0),
        },
        _ => {
            let n = rng.random_range(2..=3);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            CovariantChannel::Mixture(
                raw.into_iter()
                    .map(|w| (w / total, random_channel(rng, depth - 1)))
                    .collect(),
            )
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstruction(seed in any::<u64>(), dim in 1usize..=8) {
        let mut r = rng(seed);
        let m = random_hermitian(&mut r, dim);
        let s = eig_hermitian(&m).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&m) <= 1e-9);
        prop_assert!(s.orthonormality_error() <= 1e-9);
    }

    #[test]
    fn hs_overlap_symmetry_and_cauchy_schwarz(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let a = random_mixed(&mut r, dim);
        let b = random_mixed(&mut r, dim);
        let ab = hs_overlap(&a, &b).unwrap();
        prop_assert!((ab - hs_overlap(&b, &a).unwrap()).abs() <= 1e-14);
        prop_assert!(ab * ab <= a.purity() * b.purity() + 1e-14);
    }

    #[test]
    fn partial_trace_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f: Vec<DensityMatrix> = (0..3).map(|_| random_mixed(&mut r, 2)).collect();
        let joint = f[0].tensor(&f[1]).tensor(&f[2]);
        let step = partial_trace(joint.matrix(), &[2, 2, 2], &[0, 2]).unwrap();
        let twice = partial_trace(&step, &[2, 2], &[0]).unwrap();
        prop_assert!(twice.max_abs_diff(f[0].matrix()) <= 1e-12);
    }

    #[test]
    fn evolution_preserves_spectrum_and_commutes(seed in any::<u64>(), dim in dims(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, dim);
        let h = random_hermitian(&mut r, dim);
        let us = unitary_of(&h, s).unwrap();
        let ut = unitary_of(&h, t).unwrap();
        let ust = unitary_of(&h, s + t).unwrap();
        prop_assert!((&us * &ut).max_abs_diff(&ust) <= 1e-10);
        let out = evolve(&rho, &us).unwrap();
        for (a, b) in out.spectrum().eigenvalues().iter().zip(rho.spectrum().eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let st = evolve(&out, &ut).unwrap();
        let ts = evolve(&evolve(&rho, &ut).unwrap(), &us).unwrap();
        prop_assert!(st.matrix().max_abs_diff(ts.matrix()) <= 1e-12);
    }

    #[test]
    fn bound_chain(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, dim);
        let h = random_hermitian(&mut r, dim);
        let i_f = sldf(&rho, &h).unwrap();
        let v = variance(&rho, &h).unwrap();
        let s0 = squared_speed_zero(&rho, &h).unwrap();
        prop_assert!(s0 <= i_f + SLACK && i_f <= v + SLACK);
        for tau in [0.01, 0.1, PI / 6.0, 1.0] {
            let s = squared_speed_tau(&rho, &h, tau).unwrap().squared_speed;
            prop_assert!(s <= i_f + SLACK, "tau {tau}: {s} > {i_f}");
        }
    }

    #[test]
    fn fisher_sandwich(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, dim);
        let h = random_hermitian(&mut r, dim);
        let i_f = sldf(&rho, &h).unwrap();
        for f in functions() {
            let q = qfi_f(&rho, &h, &f).unwrap().value;
            prop_assert!(2.0 * f.at_zero() * q <= i_f + SLACK);
            prop_assert!(i_f <= q + SLACK);
        }
    }

    #[test]
    fn block_additivity_and_convexity(seed in any::<u64>(), dim in prop::sample::select(vec![2usize, 4]), m in 1usize..=4) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, dim);
        let raw: Vec<f64> = (0..m).map(|_| rand::Rng::random_range(&mut r, 0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let ensemble: Vec<(f64, DensityMatrix)> = raw
            .iter()
            .map(|w| (w / total, random_mixed(&mut r, dim)))
            .collect();
        let (block, hb) = block_ensemble(&ensemble, &h).unwrap();
        let refs: Vec<(f64, &DensityMatrix)> = ensemble.iter().map(|(p, s)| (*p, s)).collect();
        let mixed = DensityMatrix::mixture(&refs).unwrap();
        for f in functions() {
            let average: f64 = ensemble
                .iter()
                .map(|(p, s)| p * qfi_f(s, &h, &f).unwrap().value)
                .sum();
            let flagged = qfi_f(&block, &hb, &f).unwrap().value;
            prop_assert!((flagged - average).abs() <= SLACK * (1.0 + average));
            prop_assert!(qfi_f(&mixed, &h, &f).unwrap().value <= average + SLACK);
        }
    }

    #[test]
    fn contraction_under_covariant_channels(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, dim);
        let h = random_hermitian(&mut r, dim);
        let channel = random_channel(&mut r, 2);
        let out = channel.apply(&rho, &h).unwrap();
        for f in functions() {
            let before = qfi_f(&rho, &h, &f).unwrap().value;
            let after = qfi_f(&out, &h, &f).unwrap().value;
            prop_assert!(after <= before + SLACK, "{}: {after} > {before}", f.name());
        }
    }

    #[test]
    fn depolarized_sandwich_brackets_sldf(seed in any::<u64>(), dim in dims(), eps in 0.0f64..0.95) {
        let mut r = rng(seed);
        let psi = random_pure(&mut r, dim).density();
        let rho = psi.mixed_with_white_noise(eps).unwrap();
        let h = random_hermitian(&mut r, dim);
        let b = depolarized_sandwich(&rho, &h).unwrap();
        let i_f = sldf(&rho, &h).unwrap();
        prop_assert!(b.lower <= i_f + SLACK * (1.0 + i_f));
        prop_assert!(i_f <= b.upper + SLACK * (1.0 + i_f));
    }

    #[test]
    fn taylor_consistency(seed in any::<u64>(), dim in dims()) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, dim);
        let h = random_hermitian(&mut r, dim);
        let s0 = squared_speed_zero(&rho, &h).unwrap();
        let gap = |tau: f64| (squared_speed_tau(&rho, &h, tau).unwrap().squared_speed - s0).abs();
        let c = gap(0.1) / 0.01;
        for tau in [1e-3, 3e-3, 1e-2, 3e-2] {
            prop_assert!(gap(tau) <= 1.5 * c * tau * tau + 1e-8, "tau {tau}: {} vs C = {c}", gap(tau));
        }
    }

    #[test]
    fn positive_speed_iff_asymmetry(seed in any::<u64>(), dim in dims(), commuting in any::<bool>()) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, dim);
        let rho = if commuting {
            let spectrum = eig_hermitian(&h).unwrap();
            let raw: Vec<f64> = (0..dim).map(|_| rand::Rng::random_range(&mut r, 0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let terms: Vec<DensityMatrix> =
                (0..dim).map(|k| PureState::new(spectrum.vector(k)).unwrap().density()).collect();
            let refs: Vec<(f64, &DensityMatrix)> =
                raw.iter().map(|w| w / total).zip(terms.iter()).collect();
            DensityMatrix::mixture(&refs).unwrap()
        } else {
            random_mixed(&mut r, dim)
        };
        let s = squared_speed_tau(&rho, &h, 1e-2).unwrap().squared_speed;
        let i_f = sldf(&rho, &h).unwrap();
        prop_assert_eq!(s > 1e-12, i_f > 1e-10);
        prop_assert_eq!(i_f > 1e-10, !commuting);
    }

    #[test]
    fn witness_silent_on_product_states(seed in any::<u64>(), axis in axes(), tau in 0.01f64..2.0) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, 2).tensor(&random_mixed(&mut r, 2));
        let h = spin_hamiltonian(axis, 2).unwrap().into_total();
        let s = squared_speed_tau(&rho, &h, tau).unwrap().squared_speed;
        prop_assert!(s <= 0.5 + SLACK);
        prop_assert!(!entanglement_witness(s, 2).unwrap().entangled_useful);
    }

    #[test]
    fn swap_trick_matches_overlap(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_mixed(&mut r, 1 << n);
        let b = random_mixed(&mut r, 1 << n);
        let direct = hs_overlap(&a, &b).unwrap();
        prop_assert!((overlap_via_swap(&a, &b, n).unwrap() - direct).abs() <= 1e-10);
    }

    #[test]
    fn swap_estimator_on_exact_frequencies(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_mixed(&mut r, 4);
        let b = random_mixed(&mut r, 4);
        let swap = overlap_via_swap(&a, &b, 2).unwrap();
        let bsm = EffectSet::ideal_bsm();
        let table = bsm_joint_probs(&a.tensor(&b), &bsm, &bsm).unwrap();
        prop_assert!((table.raw_sum() - 1.0).abs() <= 1e-12);
        prop_assert!((estimate_from_probs(&table).unwrap() - swap).abs() <= 1e-10);
        let scale = 1e12;
        let record = CountRecord {
            labels: table.labels().to_vec(),
            counts: table.probs().iter().map(|p| (p * scale).round() as u64).collect(),
            shots: scale as u64,
            seed: 0,
        };
        prop_assert!((estimate_from_counts(&record).unwrap().value - swap).abs() <= 1e-10);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), shots in 1u64..100_000) {
        let mut r = rng(seed);
        let a = random_mixed(&mut r, 4);
        let bsm = EffectSet::ideal_bsm();
        let table = bsm_joint_probs(&a.tensor(&a), &bsm, &bsm).unwrap();
        for mode in [SamplingMode::Poisson, SamplingMode::Multinomial] {
            let x = sample_counts_with(&table, shots, seed, 3, mode).unwrap();
            let y = sample_counts_with(&table, shots, seed, 3, mode).unwrap();
            prop_assert_eq!(&x, &y);
            if mode == SamplingMode::Multinomial {
                prop_assert_eq!(x.total(), shots);
            }
        }
    }

    #[test]
    fn waveplate_round_trip(xi in -PI..PI, eta in -PI..PI, zeta in -PI..PI) {
        let e = EulerAngles::new(xi, eta, zeta);
        let seq = decompose(e);
        prop_assert!(equal_up_to_phase(&seq.unitary(JonesConvention::DiagonalFrame), &euler_unitary(e), 1e-9).unwrap());
    }

    #[test]
    fn waveplate_periodicities(theta in -PI..PI) {
        prop_assert!((&hwp(theta + PI / 2.0) + &hwp(theta)).max_abs() <= 1e-12);
        prop_assert!(qwp(theta + PI).max_abs_diff(&qwp(theta)) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn state_mle_likelihood_is_monotone(seed in any::<u64>(), shots in 100u64..10_000) {
        let mut r = rng(seed);
        let rho = random_mixed(&mut r, 4);
        let data: Vec<(EffectSet, Vec<f64>)> = pauli_settings(2)
            .unwrap()
            .into_iter()
            .map(|(_, set)| {
                let p = set.outcome_probs(&rho).unwrap();
                let counts = p.iter().map(|q| (q * shots as f64).round()).collect();
                (set, counts)
            })
            .collect();
        let result = mle_state(&data, &MleOptions::default()).unwrap();
        for w in result.history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        let est = DensityMatrix::new(result.estimate.clone());
        prop_assert!(est.is_ok());
    }

    #[test]
    fn detector_mle_is_basis_covariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let probes = ProbeSet::two_qubit();
        let effects = [random_mixed(&mut r, 4), random_mixed(&mut r, 4)];
        let first = effects[0].matrix().scale(0.5);
        let second = &CMatrix::identity(4) - &first;
        let detector = [first, second];
        let counts: Vec<Vec<f64>> = probes
            .states()
            .iter()
            .map(|s| detector.iter().map(|e| (e.expectation(s.amplitudes()).re * 5000.0).round()).collect())
            .collect();
        let v = tensor(&random_unitary(&mut r, 2), &random_unitary(&mut r, 2));
        let rotated = ProbeSet::from_states(
            probes.labels().to_vec(),
            probes.states().iter().map(|s| s.evolve(&v)).collect(),
        )
        .unwrap();
        let opts = MleOptions { max_iterations: 2000, ..MleOptions::default() };
        let base = mle_detector(&probes, &counts, &opts).unwrap();
        let turned = mle_detector(&rotated, &counts, &opts).unwrap();
        for (b, t) in base.iter().zip(&turned) {
            let expected = &(&v * &b.estimate) * &v.adjoint();
            prop_assert!(trace_distance(&expected, &t.estimate).unwrap() <= 1e-6);
        }
        for w in base[0].history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }
}
