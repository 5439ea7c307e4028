//! End-to-end purity and overlap runs with Monte Carlo error bars.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::effects::{EffectSet, NoiseModel};
use super::sampling::{
    bsm_joint_probs, estimate_from_counts, estimate_from_probs, sample_counts_with, ProbTable,
    SamplingMode, SwapEstimate,
};
use super::schedule::MixingSchedule;
use crate::dynamics::{spin_hamiltonian, unitary_of, SpinAxis};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::speed::{speed_from_measurements, squared_speed_tau, SpeedResult};

/// Number of trials per run: a finite count, or the infinite-shot limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    Exact,
    Finite(u64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u64),
    Word(String),
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = Error;

    fn try_from(r: ShotsRepr) -> Result<Self> {
        match r {
            ShotsRepr::Count(0) => Err(Error::invalid("shots must be at least 1")),
            ShotsRepr::Count(n) => Ok(Shots::Finite(n)),
            ShotsRepr::Word(w) if w == "exact" => Ok(Shots::Exact),
            ShotsRepr::Word(w) => Err(Error::invalid(format!(
                "shots must be a positive integer or \"exact\", got `{w}`"
            ))),
        }
    }
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::Exact => ShotsRepr::Word("exact".into()),
            Shots::Finite(n) => ShotsRepr::Count(n),
        }
    }
}

impl std::str::FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let repr = match s.trim().parse::<u64>() {
            Ok(n) => ShotsRepr::Count(n),
            Err(_) => ShotsRepr::Word(s.trim().to_string()),
        };
        Shots::try_from(repr)
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub shots: Shots,
    /// Resamples used for the error bar.
    pub mc_samples: usize,
    pub sampling: SamplingMode,
    pub execution: Execution,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            shots: Shots::Finite(1_000_000),
            mc_samples: 1000,
            sampling: SamplingMode::Poisson,
            execution: Execution::Parallel,
        }
    }
}

/// Outcome of one `(p, axis)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPoint {
    pub p: f64,
    pub axis: SpinAxis,
    pub tau: f64,
    /// `S_tau` of the ideal state, computed directly.
    pub s_exact: f64,
    /// Infinite-shot value through the ideal Bell measurements.
    pub s_ideal_povm: f64,
    /// Infinite-shot value through the noise model's measurements.
    pub s_noisy_povm: f64,
    /// Estimate from one sampled purity run and one sampled overlap run
    /// (equal to the noisy infinite-shot value when shots are exact).
    pub estimate: SpeedResult,
    /// Sample standard deviation of the unclipped estimate over the resamples.
    pub error_bar: f64,
    pub purity: Option<SwapEstimate>,
    pub overlap: Option<SwapEstimate>,
    /// Largest deviation of the raw outcome distributions from unit sum.
    pub normalization_deviation: f64,
}

struct Tables {
    purity: ProbTable,
    overlap: ProbTable,
}

fn tables(
    schedule: &MixingSchedule,
    u: &crate::qcore::CMatrix,
    bsm: &(EffectSet, EffectSet),
) -> Result<Tables> {
    let purity_state = schedule.joint_state(None)?;
    let overlap_state = schedule.joint_state(Some(u))?;
    Ok(Tables {
        purity: bsm_joint_probs(&purity_state, &bsm.0, &bsm.1)?,
        overlap: bsm_joint_probs(&overlap_state, &bsm.0, &bsm.1)?,
    })
}

fn exact_speed(t: &Tables, tau: f64) -> Result<SpeedResult> {
    speed_from_measurements(
        estimate_from_probs(&t.purity)?,
        estimate_from_probs(&t.overlap)?,
        tau,
    )
}

/// Streams `2k + 2` and `2k + 3` feed resample `k`; streams 0 and 1 feed the
/// reported estimate. Streams depend only on indices, so the result does not
/// depend on the execution strategy.
fn sampled_pair(
    t: &Tables,
    shots: u64,
    seed: u64,
    index: u64,
    mode: SamplingMode,
) -> Result<(SwapEstimate, SwapEstimate)> {
    let purity = estimate_from_counts(&sample_counts_with(
        &t.purity,
        shots,
        seed,
        2 * index,
        mode,
    )?)?;
    let overlap = estimate_from_counts(&sample_counts_with(
        &t.overlap,
        shots,
        seed,
        2 * index + 1,
        mode,
    )?)?;
    Ok((purity, overlap))
}

pub fn run_protocol_point(
    p: f64,
    axis: SpinAxis,
    tau: f64,
    noise: &NoiseModel,
    config: &ProtocolConfig,
    seed: u64,
) -> Result<ProtocolPoint> {
    if config.mc_samples == 0 {
        return Err(Error::invalid("mc_samples must be at least 1"));
    }
    let schedule = MixingSchedule::new(p)?;
    let h = spin_hamiltonian(axis, 2)?.into_total();
    let u = unitary_of(&h, tau)?;
    let s_exact = squared_speed_tau(&schedule.copy_state()?, &h, tau)?.squared_speed;

    let ideal = tables(
        &schedule,
        &u,
        &(EffectSet::ideal_bsm(), EffectSet::ideal_bsm()),
    )?;
    let s_ideal_povm = exact_speed(&ideal, tau)?.squared_speed;
    let noisy = if noise.is_ideal() && noise.mode == super::BsmMode::Full {
        ideal
    } else {
        tables(&schedule, &u, &noise.effect_sets()?)?
    };
    let noisy_limit = exact_speed(&noisy, tau)?;
    let normalization_deviation = (noisy.purity.raw_sum() - 1.0)
        .abs()
        .max((noisy.overlap.raw_sum() - 1.0).abs());

    let shots = match config.shots {
        Shots::Exact => {
            return Ok(ProtocolPoint {
                p,
                axis,
                tau,
                s_exact,
                s_ideal_povm,
                s_noisy_povm: noisy_limit.squared_speed,
                estimate: noisy_limit,
                error_bar: 0.0,
                purity: None,
                overlap: None,
                normalization_deviation,
            })
        }
        Shots::Finite(n) => n,
    };

    let (purity, overlap) = sampled_pair(&noisy, shots, seed, 0, config.sampling)?;
    let estimate = speed_from_measurements(purity.value, overlap.value, tau)?;
    let resampled = config
        .execution
        .map_indexed(config.mc_samples, |k| {
            sampled_pair(&noisy, shots, seed, k as u64 + 1, config.sampling)
                .map(|(pu, ov)| (pu.value - ov.value) / (tau * tau))
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;

    Ok(ProtocolPoint {
        p,
        axis,
        tau,
        s_exact,
        s_ideal_povm,
        s_noisy_povm: noisy_limit.squared_speed,
        estimate,
        error_bar: sample_std(&resampled),
        purity: Some(purity),
        overlap: Some(overlap),
        normalization_deviation,
    })
}

/// Unbiased sample standard deviation; zero for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}
