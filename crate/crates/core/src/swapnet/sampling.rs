//! Joint Bell-measurement statistics, count sampling and the swap estimator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::effects::{EffectSet, SINGLET_LABEL};
use crate::error::{Error, Result};
use crate::qcore::{permute_subsystems, tensor, DensityMatrix};

/// Separator between the two measurement outcomes in a joint label.
pub const LABEL_SEPARATOR: char = '|';

/// Negative probabilities down to this are rounding noise and are clipped.
const NEGATIVE_SLACK: f64 = 1e-10;

/// Distribution over labelled joint outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbTable {
    labels: Vec<String>,
    probs: Vec<f64>,
    /// Sum of the probabilities before renormalization.
    raw_sum: f64,
    /// Smallest probability before clipping.
    raw_min: f64,
}

impl ProbTable {
    /// Validates exact probabilities: finite, non-negative and summing to one.
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let table = ProbTable::absorbing(labels, probs, NEGATIVE_SLACK)?;
        if (table.raw_sum - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "probabilities sum to {}, not 1",
                table.raw_sum
            )));
        }
        Ok(table)
    }

    /// Clips negatives down to `-slack` and renormalizes. The raw sum and
    /// minimum stay available for reporting.
    fn absorbing(labels: Vec<String>, mut probs: Vec<f64>, slack: f64) -> Result<Self> {
        if labels.len() != probs.len() || probs.is_empty() {
            return Err(Error::invalid(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("probability {bad} is not finite")));
        }
        let raw_sum: f64 = probs.iter().sum();
        let raw_min = probs.iter().cloned().fold(f64::INFINITY, f64::min);
        if raw_min < -slack {
            return Err(Error::invalid(format!("negative probability {raw_min}")));
        }
        for p in probs.iter_mut() {
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("probabilities have zero total weight"));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(ProbTable {
            labels,
            probs,
            raw_sum,
            raw_min,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    pub fn raw_min(&self) -> f64 {
        self.raw_min
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|k| self.probs[k])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub fn joint_label(a: &str, b: &str) -> String {
    format!("{a}{LABEL_SEPARATOR}{b}")
}

/// Wire order taking `(A1 B1 A2 B2)` to `(A1 A2 B1 B2)`.
pub const PAIR_ORDER: [usize; 4] = [0, 2, 1, 3];

/// Outcome distribution of `bsm1` on `(A1, A2)` and `bsm2` on `(B1, B2)` for a
/// two-copy state laid out as `(A1 B1 A2 B2)`.
///
/// Small negative probabilities and normalization errors from inexact
/// effects (down to the effects' own completeness deviation) are clipped and
/// renormalized; [`ProbTable::raw_sum`] records the deviation.
pub fn bsm_joint_probs(
    joint: &DensityMatrix,
    bsm1: &EffectSet,
    bsm2: &EffectSet,
) -> Result<ProbTable> {
    if joint.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: joint.dim(),
        });
    }
    for e in [bsm1, bsm2] {
        if e.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: e.dim(),
            });
        }
    }
    let measured = permute_subsystems(joint.matrix(), &[2, 2, 2, 2], &PAIR_ORDER)?;
    let mut labels = Vec::with_capacity(bsm1.len() * bsm2.len());
    let mut probs = Vec::with_capacity(bsm1.len() * bsm2.len());
    for (la, ea) in bsm1.labels().iter().zip(bsm1.effects()) {
        for (lb, eb) in bsm2.labels().iter().zip(bsm2.effects()) {
            labels.push(joint_label(la, lb));
            probs.push(tensor(ea, eb).trace_product(&measured).re);
        }
    }
    let slack =
        NEGATIVE_SLACK.max(2.0 * (bsm1.completeness_deviation() + bsm2.completeness_deviation()));
    ProbTable::absorbing(labels, probs, slack)
}

/// Observed outcome counts of one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    /// Nominal number of trials. Under Poisson counting it is the expected
    /// total, so the recorded total may exceed it.
    pub shots: u64,
    pub seed: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn get(&self, label: &str) -> Option<u64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|k| self.counts[k])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Independent Poisson count per outcome with mean `shots * p`.
    #[default]
    Poisson,
    /// Exactly `shots` trials split multinomially.
    Multinomial,
}

/// Deterministic generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_counts(probs: &ProbTable, shots: u64, seed: u64) -> Result<CountRecord> {
    sample_counts_with(probs, shots, seed, 0, SamplingMode::Poisson)
}

/// Samples counts from `probs` using random stream `stream` of `seed`.
pub fn sample_counts_with(
    probs: &ProbTable,
    shots: u64,
    seed: u64,
    stream: u64,
    mode: SamplingMode,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let mut rng = stream_rng(seed, stream);
    let counts = match mode {
        SamplingMode::Poisson => probs
            .probs()
            .iter()
            .map(|&p| {
                let mean = shots as f64 * p;
                if mean <= 0.0 {
                    return Ok(0);
                }
                let dist = Poisson::new(mean)
                    .map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?;
                Ok(dist.sample(&mut rng) as u64)
            })
            .collect::<Result<Vec<_>>>()?,
        SamplingMode::Multinomial => {
            let mut remaining = shots;
            let mut mass = 1.0;
            let mut counts = Vec::with_capacity(probs.len());
            for &p in probs.probs() {
                let k = if remaining == 0 || mass <= 0.0 {
                    0
                } else {
                    let q = (p / mass).clamp(0.0, 1.0);
                    Binomial::new(remaining, q)
                        .map_err(|e| Error::invalid(format!("binomial p = {q}: {e}")))?
                        .sample(&mut rng)
                };
                counts.push(k);
                remaining -= k;
                mass -= p;
            }
            if let Some(last) = counts.last_mut() {
                *last += remaining;
            }
            counts
        }
    };
    Ok(CountRecord {
        labels: probs.labels().to_vec(),
        counts,
        shots,
        seed,
    })
}

/// Swap-operator estimate `1 - 2 f1 - 2 f2 + 4 f12` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Frequency of the singlet outcome on the first pair.
    pub f1: f64,
    /// Frequency of the singlet outcome on the second pair.
    pub f2: f64,
    /// Frequency of singlet outcomes on both pairs.
    pub f12: f64,
    pub total: f64,
}

/// Sign `(1 - 2 a)(1 - 2 b)` that a joint outcome contributes to the swap
/// estimate, with `a`, `b` marking singlet outcomes.
fn swap_signs(labels: &[String]) -> Result<Vec<(bool, bool)>> {
    let signs = labels
        .iter()
        .map(|l| {
            let (a, b) = l
                .split_once(LABEL_SEPARATOR)
                .ok_or_else(|| Error::invalid(format!("outcome label `{l}` is not `a|b`")))?;
            Ok((a == SINGLET_LABEL, b == SINGLET_LABEL))
        })
        .collect::<Result<Vec<_>>>()?;
    if !signs.iter().any(|s| s.0) || !signs.iter().any(|s| s.1) {
        return Err(Error::invalid(format!(
            "outcomes must include the `{SINGLET_LABEL}` result on both pairs"
        )));
    }
    Ok(signs)
}

fn swap_from_weights(labels: &[String], weights: &[f64], total: f64) -> Result<SwapEstimate> {
    let signs = swap_signs(labels)?;
    let (mut f1, mut f2, mut f12) = (0.0, 0.0, 0.0);
    for (&(a, b), &w) in signs.iter().zip(weights) {
        let f = w / total;
        if a {
            f1 += f;
        }
        if b {
            f2 += f;
        }
        if a && b {
            f12 += f;
        }
    }
    let value = 1.0 - 2.0 * f1 - 2.0 * f2 + 4.0 * f12;
    Ok(SwapEstimate {
        value,
        stderr: ((1.0 - value * value).max(0.0) / total).sqrt(),
        f1,
        f2,
        f12,
        total,
    })
}

pub fn estimate_from_counts(counts: &CountRecord) -> Result<SwapEstimate> {
    if counts.labels.len() != counts.counts.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} counts",
            counts.labels.len(),
            counts.counts.len()
        )));
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let weights: Vec<f64> = counts.counts.iter().map(|&c| c as f64).collect();
    swap_from_weights(&counts.labels, &weights, total as f64)
}

/// Infinite-shot limit: frequencies replaced by exact probabilities.
pub fn estimate_from_probs(probs: &ProbTable) -> Result<f64> {
    Ok(swap_from_weights(probs.labels(), probs.probs(), 1.0)?.value)
}
