//! Fixed-point likelihood maximization for states (`R rho R`) and for
//! detector effects.
//!
//! Both iterations take the undiluted step when it raises the likelihood and
//! otherwise retry with the diluted map `(I + eps R) / (1 + eps)`, halving
//! `eps` until the likelihood does not drop. The recorded likelihood
//! sequence is therefore non-decreasing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ensure_complete, ProbeSet};
use crate::error::{Error, Result};
use crate::qcore::{eig_hermitian, CMatrix};
use crate::swapnet::EffectSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step gains less log-likelihood than this.
    pub tolerance: f64,
    /// Dilution below which a step counts as stalled.
    pub min_dilution: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iterations: 10_000,
            tolerance: 1e-10,
            min_dilution: 1e-10,
        }
    }
}

/// Reconstruction outcome. `log_likelihood` is per recorded event,
/// `sum_k (n_k / N) ln p_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub estimate: CMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted step, starting from the initial guess.
    pub history: Vec<f64>,
}

fn check_counts(counts: &[f64]) -> Result<()> {
    if let Some(bad) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::invalid(format!(
            "count {bad} is not a non-negative number"
        )));
    }
    Ok(())
}

fn log_likelihood(freqs: &[f64], probs: &[f64]) -> f64 {
    freqs
        .iter()
        .zip(probs)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, p)| {
            if *p > 0.0 {
                f * p.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .sum()
}

/// `(I + eps R) / (1 + eps)`, or `R` itself for the undiluted step.
fn diluted(r: &CMatrix, eps: Option<f64>) -> CMatrix {
    match eps {
        None => r.clone(),
        Some(eps) => (&CMatrix::identity(r.dim()) + &r.scale(eps)).scale(1.0 / (1.0 + eps)),
    }
}

/// Shared accept/retry loop. `step(eps)` proposes a candidate and its
/// log-likelihood from the current iterate.
fn ascend<T: Clone>(
    mut current: T,
    mut ll: f64,
    options: &MleOptions,
    mut step: impl FnMut(&T, Option<f64>) -> Result<(T, f64)>,
) -> Result<(T, Vec<f64>, usize, bool)> {
    let mut history = vec![ll];
    let mut eps: Option<f64> = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        let (candidate, cand_ll) = step(&current, eps)?;
        if cand_ll >= ll {
            let gain = cand_ll - ll;
            current = candidate;
            ll = cand_ll;
            history.push(ll);
            if gain < options.tolerance {
                converged = true;
                break;
            }
            if let Some(e) = eps {
                eps = Some(e * 2.0);
            }
        } else {
            let next = eps.map_or(1.0, |e| e / 2.0);
            if next < options.min_dilution {
                converged = true;
                break;
            }
            eps = Some(next);
        }
    }
    Ok((current, history, iterations, converged))
}

/// Reconstructs a density matrix from counts of several measurement settings.
pub fn mle_state(data: &[(EffectSet, Vec<f64>)], options: &MleOptions) -> Result<TomographyResult> {
    let (first, _) = data
        .first()
        .ok_or_else(|| Error::invalid("no measurement settings"))?;
    let d = first.dim();
    let mut effects = Vec::new();
    let mut counts = Vec::new();
    for (set, n) in data {
        if set.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: set.dim(),
            });
        }
        if n.len() != set.len() {
            return Err(Error::invalid(format!(
                "{} counts for {} outcomes",
                n.len(),
                set.len()
            )));
        }
        check_counts(n)?;
        effects.extend(set.effects().iter().cloned());
        counts.extend(n.iter().cloned());
    }
    ensure_complete(&effects, d)?;
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyCounts);
    }
    let freqs: Vec<f64> = counts.iter().map(|n| n / total).collect();

    let probs =
        |rho: &CMatrix| -> Vec<f64> { effects.iter().map(|e| e.trace_product(rho).re).collect() };
    let start = CMatrix::identity(d).scale(1.0 / d as f64);
    let ll0 = log_likelihood(&freqs, &probs(&start));
    let (estimate, history, iterations, converged) = ascend(start, ll0, options, |rho, eps| {
        let p = probs(rho);
        let mut r = CMatrix::zeros(d);
        for ((e, f), pk) in effects.iter().zip(&freqs).zip(&p) {
            if *f > 0.0 && *pk > 0.0 {
                r = &r + &e.scale(f / pk);
            }
        }
        let t = diluted(&r, eps);
        let next = (&(&t * rho) * &t).hermitian_part();
        let tr = next.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Ok((rho.clone(), f64::NEG_INFINITY));
        }
        let next = next.scale(1.0 / tr);
        let ll = log_likelihood(&freqs, &probs(&next));
        Ok((next, ll))
    })?;
    Ok(TomographyResult {
        estimate,
        log_likelihood: *history.last().expect("history starts non-empty"),
        iterations,
        converged,
        history,
    })
}

/// Reconstructs the `K` effects of a detector from probe-state counts;
/// `counts[j][m]` is how often outcome `m` fired for probe `j`.
///
/// Each step maps `E_m -> L^{-1} R_m E_m R_m L^{-1}` with
/// `R_m = sum_j (f_jm / p_jm) rho_j` and `L = (sum_m R_m E_m R_m)^{1/2}`, so the
/// effects stay positive and complete.
pub fn mle_detector(
    probes: &ProbeSet,
    counts: &[Vec<f64>],
    options: &MleOptions,
) -> Result<Vec<TomographyResult>> {
    if counts.len() != probes.len() {
        return Err(Error::invalid(format!(
            "{} count rows for {} probes",
            counts.len(),
            probes.len()
        )));
    }
    let k = counts.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::invalid("detector must have at least one outcome"));
    }
    for row in counts {
        if row.len() != k {
            return Err(Error::invalid("count rows have different outcome counts"));
        }
        check_counts(row)?;
    }
    let d = probes.dim();
    let states: Vec<CMatrix> = probes.states().iter().map(|s| s.projector()).collect();
    ensure_complete(&states, d)?;
    let total: f64 = counts.iter().flatten().sum();
    if total <= 0.0 {
        return Err(Error::EmptyCounts);
    }
    let freqs: Vec<f64> = counts.iter().flatten().map(|n| n / total).collect();

    let probs = |effects: &[CMatrix]| -> Vec<f64> {
        states
            .iter()
            .flat_map(|rho| effects.iter().map(move |e| e.trace_product(rho).re))
            .collect()
    };
    let start = vec![CMatrix::identity(d).scale(1.0 / k as f64); k];
    let ll0 = log_likelihood(&freqs, &probs(&start));
    let (effects, history, iterations, converged) = ascend(start, ll0, options, |effects, eps| {
        let p = probs(effects);
        let mut sandwiches = Vec::with_capacity(k);
        let mut sum = CMatrix::zeros(d);
        for (m, e) in effects.iter().enumerate() {
            let mut r = CMatrix::zeros(d);
            for (j, rho) in states.iter().enumerate() {
                let (f, pk) = (freqs[j * k + m], p[j * k + m]);
                if f > 0.0 && pk > 0.0 {
                    r = &r + &rho.scale(f / pk);
                }
            }
            let t = diluted(&r, eps);
            let s = (&(&t * e) * &t).hermitian_part();
            sum = &sum + &s;
            sandwiches.push(s);
        }
        let sum = sum.hermitian_part();
        let spectrum = eig_hermitian(&sum)?;
        // Completeness can only be restored on the support of the sum, so a
        // step that loses rank is rejected.
        if spectrum.min_eigenvalue() <= 1e-14 * spectrum.max_eigenvalue() {
            return Ok((effects.to_vec(), f64::NEG_INFINITY));
        }
        let inv_root = spectrum.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0));
        let next: Vec<CMatrix> = sandwiches
            .iter()
            .map(|s| (&(&inv_root * s) * &inv_root).hermitian_part())
            .collect();
        let ll = log_likelihood(&freqs, &probs(&next));
        Ok((next, ll))
    })?;
    let ll = *history.last().expect("history starts non-empty");
    Ok(effects
        .into_iter()
        .map(|estimate| TomographyResult {
            estimate,
            log_likelihood: ll,
            iterations,
            converged,
            history: history.clone(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity_pure, trace_distance, BellState, DensityMatrix};
    use crate::swapnet::{sample_counts, ProbTable};
    use crate::tomography::{pauli_settings, ProbeSet};

    fn exact_state_data(rho: &DensityMatrix) -> Vec<(EffectSet, Vec<f64>)> {
        pauli_settings(2)
            .unwrap()
            .into_iter()
            .map(|(_, set)| {
                let p = set.outcome_probs(rho).unwrap();
                (set, p)
            })
            .collect()
    }

    fn assert_monotone(history: &[f64]) {
        for w in history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn pure_state_from_exact_probabilities() {
        let target = BellState::PhiPlus;
        let r = mle_state(&exact_state_data(&target.density()), &MleOptions::default()).unwrap();
        let rho = DensityMatrix::repair(&r.estimate).unwrap().0;
        assert!(
            fidelity_pure(&target.state(), &rho).unwrap() >= 0.9999,
            "{r:?}"
        );
        assert_monotone(&r.history);
    }

    #[test]
    fn mixed_state_from_exact_probabilities() {
        let rho = DensityMatrix::mixture(&[
            (0.3, &BellState::PhiPlus.density()),
            (0.7, &BellState::PhiMinus.density()),
        ])
        .unwrap();
        let r = mle_state(&exact_state_data(&rho), &MleOptions::default()).unwrap();
        assert!(trace_distance(&r.estimate, rho.matrix()).unwrap() <= 1e-3);
        assert!(r.converged);
        assert_monotone(&r.history);
        assert!((r.estimate.trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn generating_state_is_a_fixed_point() {
        let rho = BellState::PsiPlus
            .density()
            .mixed_with_white_noise(0.3)
            .unwrap();
        let data = exact_state_data(&rho);
        let effects: Vec<CMatrix> = data
            .iter()
            .flat_map(|(s, _)| s.effects().to_vec())
            .collect();
        let freqs: Vec<f64> = data
            .iter()
            .flat_map(|(_, p)| p.clone())
            .map(|p| p / 9.0)
            .collect();
        let mut r = CMatrix::zeros(4);
        for (e, f) in effects.iter().zip(&freqs) {
            let p = e.trace_product(rho.matrix()).re;
            if *f > 0.0 {
                r = &r + &e.scale(f / p);
            }
        }
        let next = (&(&r * rho.matrix()) * &r).hermitian_part();
        let next = next.scale(1.0 / next.trace().re);
        assert!(next.max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn sampled_counts_give_high_fidelity() {
        let target = BellState::PhiPlus;
        let data: Vec<(EffectSet, Vec<f64>)> = pauli_settings(2)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(k, (_, set))| {
                let p = set.outcome_probs(&target.density()).unwrap();
                let table = ProbTable::new(set.labels().to_vec(), p).unwrap();
                let c = sample_counts(&table, 100_000, 100 + k as u64).unwrap();
                (set, c.counts.iter().map(|&n| n as f64).collect())
            })
            .collect();
        let r = mle_state(&data, &MleOptions::default()).unwrap();
        let rho = DensityMatrix::repair(&r.estimate).unwrap().0;
        assert!(fidelity_pure(&target.state(), &rho).unwrap() >= 0.995);
        assert_monotone(&r.history);
    }

    #[test]
    fn incomplete_settings_are_rejected() {
        let rho = BellState::PhiPlus.density();
        let data: Vec<_> = exact_state_data(&rho)
            .into_iter()
            .filter(|(s, _)| s.labels().len() == 4)
            .take(2)
            .collect();
        assert!(matches!(
            mle_state(&data, &MleOptions::default()),
            Err(Error::RankDeficient { .. })
        ));
        assert!(mle_state(&[], &MleOptions::default()).is_err());
    }

    fn exact_detector_counts(probes: &ProbeSet, effects: &[CMatrix]) -> Vec<Vec<f64>> {
        probes
            .states()
            .iter()
            .map(|s| {
                effects
                    .iter()
                    .map(|e| e.expectation(s.amplitudes()).re.max(0.0))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn ideal_bell_detector_is_recovered() {
        let probes = ProbeSet::two_qubit();
        let truth = EffectSet::ideal_bsm();
        let counts = exact_detector_counts(&probes, truth.effects());
        let results = mle_detector(&probes, &counts, &MleOptions::default()).unwrap();
        let sum = results
            .iter()
            .fold(CMatrix::zeros(4), |a, r| &a + &r.estimate);
        assert!(sum.max_abs_diff(&CMatrix::identity(4)) < 1e-6);
        for (r, e) in results.iter().zip(truth.effects()) {
            assert!(
                trace_distance(&r.estimate, e).unwrap() <= 1e-3,
                "{}",
                r.iterations
            );
        }
        assert_monotone(&results[0].history);
    }

    #[test]
    fn degenerate_probes_are_rejected() {
        let probes = ProbeSet::from_labels(&["HH", "HV", "VH", "VV"]).unwrap();
        let counts = exact_detector_counts(&probes, EffectSet::ideal_bsm().effects());
        assert!(matches!(
            mle_detector(&probes, &counts, &MleOptions::default()),
            Err(Error::RankDeficient {
                rank: 4,
                required: 16
            })
        ));
    }
}
