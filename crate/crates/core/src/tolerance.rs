//! Numerical tolerances shared by every validation routine.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity, unit trace and positivity of density matrices.
    pub validation: f64,
    /// Spectral reconstruction and eigenvector orthonormality.
    pub reconstruction: f64,
    /// Euclidean norm of pure-state vectors.
    pub normalization: f64,
    /// Eigenvalue pairs closer than this are treated as degenerate in spectral sums.
    pub degeneracy: f64,
    /// Positivity of measurement effects.
    pub effect_psd: f64,
    /// Completeness of an effect set, max |sum E - I|.
    pub effect_completeness: f64,
    /// Unitarity, max |U U^dagger - I|.
    pub unitarity: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        validation: 1e-10,
        reconstruction: 1e-9,
        normalization: 1e-12,
        degeneracy: 1e-12,
        effect_psd: 1e-9,
        effect_completeness: 1e-8,
        unitarity: 1e-10,
    };

    /// Tolerances loose enough for the experimentally reconstructed projector fixtures.
    pub const FIXTURE: Tolerances = Tolerances {
        effect_psd: 2e-2,
        effect_completeness: 2e-2,
        ..Tolerances::DEFAULT
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}
