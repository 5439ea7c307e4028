//! Speed of a state under unitary evolution and the bounds it certifies.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{eig_hermitian, CMatrix, DensityMatrix};

/// Evolution interval used by the two-qubit experiment.
pub const DEFAULT_TAU: f64 = PI / 6.0;

/// Lower bound of the range accepted for noisy purity/overlap estimates.
const ESTIMATE_MIN: f64 = -0.5;
const ESTIMATE_MAX: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedResult {
    /// Average rate of change `||rho_tau - rho||_2 / tau`.
    pub s_tau: f64,
    /// `S_tau = (purity - overlap) / tau^2`, clipped at zero.
    pub squared_speed: f64,
    /// `S_tau` before clipping; differs from `squared_speed` only for noisy estimates.
    pub raw_squared_speed: f64,
    pub tau: f64,
    pub purity: f64,
    pub overlap: f64,
    /// Set when a negative estimate was clipped to zero.
    pub clipped: bool,
}

impl SpeedResult {
    fn from_terms(purity: f64, overlap: f64, tau: f64) -> Self {
        let raw = (purity - overlap) / (tau * tau);
        let clipped = raw < 0.0;
        let squared_speed = raw.max(0.0);
        SpeedResult {
            s_tau: (2.0 * squared_speed).sqrt(),
            squared_speed,
            raw_squared_speed: raw,
            tau,
            purity,
            overlap,
            clipped,
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// `S_tau(rho, H) = (Tr rho^2 - Tr(rho U rho U^dagger)) / tau^2`, `U = exp(-i H tau)`.
///
/// The difference is evaluated in the eigenbasis of `H` as
/// `sum_{kl} 2 |rho_kl|^2 sin^2((E_k - E_l) tau / 2)`, which avoids cancellation
/// for small `tau`; `overlap` is reported as `purity` minus that sum.
pub fn squared_speed_tau(rho: &DensityMatrix, h: &CMatrix, tau: f64) -> Result<SpeedResult> {
    check_tau(tau)?;
    rho.matrix().ensure_same_dim(h)?;
    let spectrum = eig_hermitian(h)?;
    let energies = spectrum.eigenvalues();
    let local = spectrum.in_eigenbasis(rho.matrix());
    let d = energies.len();
    let mut loss = 0.0;
    for k in 0..d {
        for l in (k + 1)..d {
            let s = (0.5 * (energies[k] - energies[l]) * tau).sin();
            loss += 4.0 * local.get(k, l).norm_sqr() * s * s;
        }
    }
    let purity = rho.purity();
    let squared_speed = loss / (tau * tau);
    Ok(SpeedResult {
        s_tau: (2.0 * squared_speed).sqrt(),
        squared_speed,
        raw_squared_speed: squared_speed,
        tau,
        purity,
        overlap: purity - loss,
        clipped: false,
    })
}

/// Zero-shift limit `S_0 = -Tr([rho, H]^2) / 2`.
pub fn squared_speed_zero(rho: &DensityMatrix, h: &CMatrix) -> Result<f64> {
    rho.matrix().ensure_same_dim(h)?;
    let c = rho.matrix().commutator(h);
    Ok((-0.5 * c.trace_product(&c).re).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub s_value: f64,
    pub threshold: f64,
    /// `s_value > n/4`: entanglement that beats separable phase-estimation
    /// precision, a stronger statement than non-separability.
    pub entangled_useful: bool,
}

pub fn entanglement_witness(s_value: f64, n: usize) -> Result<WitnessVerdict> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "the witness needs at least two sites, got {n}"
        )));
    }
    if s_value.is_nan() || s_value < 0.0 {
        return Err(Error::invalid(format!(
            "speed value must be non-negative, got {s_value}"
        )));
    }
    let threshold = n as f64 / 4.0;
    Ok(WitnessVerdict {
        s_value,
        threshold,
        entangled_useful: s_value > threshold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedSandwich {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on the SLDF of `(1 - eps) |psi><psi| + eps I/d` from the zero-shift
/// speed and the purity: `S_0 <= I_F <= sqrt((d-1)/(d Tr rho^2 - 1)) S_0`.
/// The caller asserts the state has that form.
pub fn depolarized_sandwich(rho_eps: &DensityMatrix, h: &CMatrix) -> Result<SpeedSandwich> {
    let d = rho_eps.dim() as f64;
    let purity = rho_eps.purity();
    if purity <= 1.0 / d + 1e-12 {
        return Err(Error::MaximallyMixed {
            purity,
            inverse_dim: 1.0 / d,
        });
    }
    let s0 = squared_speed_zero(rho_eps, h)?;
    let factor = ((d - 1.0) / (d * purity - 1.0)).sqrt();
    Ok(SpeedSandwich {
        lower: s0,
        upper: factor * s0,
    })
}

/// Speed from (possibly noisy) purity and overlap estimates. Negative speeds
/// are clipped to zero and flagged.
pub fn speed_from_measurements(purity: f64, overlap: f64, tau: f64) -> Result<SpeedResult> {
    check_tau(tau)?;
    for (name, v) in [("purity", purity), ("overlap", overlap)] {
        if !(ESTIMATE_MIN..=ESTIMATE_MAX).contains(&v) {
            return Err(Error::invalid(format!(
                "{name} estimate {v} outside [{ESTIMATE_MIN}, {ESTIMATE_MAX}]"
            )));
        }
    }
    Ok(SpeedResult::from_terms(purity, overlap, tau))
}
