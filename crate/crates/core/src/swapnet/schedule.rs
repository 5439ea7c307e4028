//! Classical mixing of `phi+`/`phi-` preparations by quarter-wave plate settings.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{tensor, BellState, CMatrix, DensityMatrix, PureState};
use crate::tolerance::Tolerances;
use crate::waveplate::qwp;

/// Fraction of acquisition time spent on each pair of plate settings, so the
/// accumulated data equals that of the mixture `rho_p (x) rho_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingSchedule {
    pub p: f64,
    /// `{p^2, p(1-p), p(1-p), (1-p)^2}`.
    pub weights: [f64; 4],
    /// Plate angles (degrees) for the first and second copy.
    pub settings: [(f64, f64); 4],
}

impl MixingSchedule {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "mixing weight p = {p} outside [0, 1]"
            )));
        }
        let q = 1.0 - p;
        Ok(MixingSchedule {
            p,
            weights: [p * p, p * q, q * p, q * q],
            settings: [(0.0, 0.0), (0.0, 90.0), (90.0, 0.0), (90.0, 90.0)],
        })
    }

    /// One copy prepared with its plate at `degrees`: `(Q(theta) Q(0)^dagger (x) I)|phi+>`.
    /// At 90 degrees the plate pair acts as `i sz` and yields `phi-`.
    pub fn branch_state(degrees: f64) -> PureState {
        let theta = degrees.to_radians();
        let local = &qwp(theta) * &qwp(0.0).adjoint();
        BellState::PhiPlus
            .state()
            .evolve(&tensor(&local, &CMatrix::identity(2)))
    }

    /// `rho_p` on one copy, as the time-weighted plate settings produce it.
    pub fn copy_state(&self) -> Result<DensityMatrix> {
        let plus = Self::branch_state(0.0).density();
        let minus = Self::branch_state(90.0).density();
        DensityMatrix::mixture(&[(self.p, &plus), (1.0 - self.p, &minus)])
    }

    /// Two-copy state in the `(A1 B1 A2 B2)` layout, with `u2` (if any)
    /// applied to the second copy: the weighted sum over all four branches.
    pub fn joint_state(&self, u2: Option<&CMatrix>) -> Result<DensityMatrix> {
        let branches: Vec<DensityMatrix> = self
            .settings
            .iter()
            .map(|&(a, b)| {
                let first = Self::branch_state(a).density();
                let second = Self::branch_state(b);
                let second = match u2 {
                    Some(u) => {
                        u.ensure_unitary(Tolerances::DEFAULT.unitarity)?;
                        second.evolve(u)
                    }
                    None => second,
                };
                Ok(first.tensor(&second.density()))
            })
            .collect::<Result<_>>()?;
        let terms: Vec<(f64, &DensityMatrix)> =
            self.weights.iter().cloned().zip(branches.iter()).collect();
        DensityMatrix::mixture(&terms)
    }

    /// Total weight, 1 up to rounding.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Plate angle in radians used for the `phi-` branch.
pub const PHI_MINUS_PLATE: f64 = FRAC_PI_2;
