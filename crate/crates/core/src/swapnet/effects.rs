//! Measurement effect sets, Bell-state measurements and their noise models.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::qcore::{eig_hermitian, BellState, CMatrix, DensityMatrix, MatrixJson};
use crate::tolerance::Tolerances;

/// Outcome label of the singlet projection.
pub const SINGLET_LABEL: &str = "psi-";
/// Label of the merged `{phi+, phi-}` outcome of a partial Bell measurement.
pub const PHI_CLASS_LABEL: &str = "phi";

/// Labelled POVM: positive effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectSet {
    labels: Vec<String>,
    effects: Vec<CMatrix>,
    completeness_deviation: f64,
}

impl EffectSet {
    pub fn new(labels: Vec<String>, effects: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::invalid(
                "effect set must contain at least one effect",
            ));
        }
        if labels.len() != effects.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} effects",
                labels.len(),
                effects.len()
            )));
        }
        let dim = effects[0].dim();
        let mut sum = CMatrix::zeros(dim);
        for (label, e) in labels.iter().zip(&effects) {
            e.ensure_same_dim(&effects[0])?;
            e.ensure_hermitian(tol.effect_psd)?;
            let min = eig_hermitian(&e.hermitian_part())?.min_eigenvalue();
            if min < -tol.effect_psd {
                return Err(Error::NegativeEffect {
                    label: label.clone(),
                    min_eigenvalue: min,
                });
            }
            sum = &sum + e;
        }
        let completeness_deviation = sum.max_abs_diff(&CMatrix::identity(dim));
        if completeness_deviation > tol.effect_completeness {
            return Err(Error::IncompletePovm {
                deviation: completeness_deviation,
            });
        }
        Ok(EffectSet {
            labels,
            effects,
            completeness_deviation,
        })
    }

    /// Projective measurement onto the four Bell states.
    pub fn ideal_bsm() -> Self {
        let labels = BellState::ALL
            .iter()
            .map(|b| b.label().to_string())
            .collect();
        let effects = BellState::ALL.iter().map(|b| b.projector()).collect();
        EffectSet::new(labels, effects, &Tolerances::DEFAULT).expect("Bell projectors form a POVM")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// `max |sum_k E_k - I|`.
    pub fn completeness_deviation(&self) -> f64 {
        self.completeness_deviation
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn effect(&self, label: &str) -> Option<&CMatrix> {
        self.index_of(label).map(|k| &self.effects[k])
    }

    /// Scales every off-diagonal entry (computational basis) by `v`.
    ///
    /// Each new effect is `v E + (1 - v) diag(E)`, so positivity and the
    /// completeness deviation are preserved.
    pub fn with_visibility(&self, v: f64) -> Result<Self> {
        check_visibility(v)?;
        let effects = self
            .effects
            .iter()
            .map(|e| e.map_entries(|i, j, z| if i == j { z } else { z * v }))
            .collect::<Vec<_>>();
        let dim = self.dim();
        let sum = effects.iter().fold(CMatrix::zeros(dim), |acc, e| &acc + e);
        Ok(EffectSet {
            labels: self.labels.clone(),
            completeness_deviation: sum.max_abs_diff(&CMatrix::identity(dim)),
            effects,
        })
    }

    /// Coarse-grains outcomes: every `(new_label, members)` group is replaced
    /// by the sum of its members. Outcomes not named in any group are kept.
    pub fn merge(&self, groups: &[(&str, &[&str])]) -> Result<Self> {
        let mut labels = Vec::new();
        let mut effects = Vec::new();
        let mut used = vec![false; self.len()];
        for (name, members) in groups {
            let mut sum = CMatrix::zeros(self.dim());
            for m in *members {
                let k = self
                    .index_of(m)
                    .ok_or_else(|| Error::invalid(format!("no outcome labelled `{m}`")))?;
                if used[k] {
                    return Err(Error::invalid(format!("outcome `{m}` merged twice")));
                }
                used[k] = true;
                sum = &sum + &self.effects[k];
            }
            labels.push(name.to_string());
            effects.push(sum);
        }
        for (k, was_used) in used.iter().enumerate() {
            if !was_used {
                labels.push(self.labels[k].clone());
                effects.push(self.effects[k].clone());
            }
        }
        Ok(EffectSet {
            labels,
            effects,
            completeness_deviation: self.completeness_deviation,
        })
    }

    /// Partial Bell measurement that cannot tell `phi+` from `phi-`.
    pub fn phi_class_merged(&self) -> Result<Self> {
        self.merge(&[(PHI_CLASS_LABEL, &["phi+", "phi-"])])
    }

    /// `Tr(E_k rho)` for every effect.
    pub fn outcome_probs(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        rho.matrix().ensure_same_dim(&self.effects[0])?;
        Ok(self
            .effects
            .iter()
            .map(|e| e.trace_product(rho.matrix()).re)
            .collect())
    }

    pub fn read_json(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: EffectSetJson = serde_json::from_str(&text)?;
        let effects = raw
            .effects
            .into_iter()
            .map(CMatrix::try_from)
            .collect::<Result<Vec<_>>>()?;
        EffectSet::new(raw.labels, effects, tol)
    }

    pub fn to_json(&self) -> EffectSetJson {
        EffectSetJson {
            labels: self.labels.clone(),
            effects: self
                .effects
                .iter()
                .map(|e| MatrixJson::from(e.clone()))
                .collect(),
        }
    }
}

/// On-disk form of an [`EffectSet`]: `{"labels":[..],"effects":[matrix-JSON,..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectSetJson {
    pub labels: Vec<String>,
    pub effects: Vec<MatrixJson>,
}

fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("visibility {v} outside [0, 1]")));
    }
    Ok(())
}

/// Outcome structure of each Bell measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsmMode {
    /// All four Bell outcomes resolved.
    #[default]
    Full,
    /// `phi+` and `phi-` merged into one outcome; the singlet stays resolved.
    PhiClassMerged,
}

/// Where the Bell-measurement effects on the two subsystem pairs come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjectorSource {
    /// Exact Bell projectors on both pairs.
    #[default]
    Ideal,
    /// The first reconstructed measurement on both pairs.
    Fixture1,
    /// The second reconstructed measurement on both pairs.
    Fixture2,
    /// First reconstruction on pair `A1A2`, second on pair `B1B2`.
    Fixtures,
    /// Effect-set JSON files for each pair.
    Custom { pair_a: PathBuf, pair_b: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Interference visibility in `[0, 1]` applied to both measurements.
    pub visibility: f64,
    pub source: ProjectorSource,
    pub mode: BsmMode,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ideal()
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel {
            visibility: 1.0,
            source: ProjectorSource::Ideal,
            mode: BsmMode::Full,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.visibility == 1.0 && self.source == ProjectorSource::Ideal
    }

    pub fn validate(&self) -> Result<()> {
        check_visibility(self.visibility)
    }

    /// Effect sets for the `A1A2` and `B1B2` measurements.
    pub fn effect_sets(&self) -> Result<(EffectSet, EffectSet)> {
        self.validate()?;
        let (a, b) = match &self.source {
            ProjectorSource::Ideal => (EffectSet::ideal_bsm(), EffectSet::ideal_bsm()),
            ProjectorSource::Fixture1 => {
                let e = fixtures::bsm_effects(1)?;
                (e.clone(), e)
            }
            ProjectorSource::Fixture2 => {
                let e = fixtures::bsm_effects(2)?;
                (e.clone(), e)
            }
            ProjectorSource::Fixtures => (fixtures::bsm_effects(1)?, fixtures::bsm_effects(2)?),
            ProjectorSource::Custom { pair_a, pair_b } => (
                EffectSet::read_json(pair_a, &Tolerances::FIXTURE)?,
                EffectSet::read_json(pair_b, &Tolerances::FIXTURE)?,
            ),
        };
        let finish = |e: EffectSet| -> Result<EffectSet> {
            let e = e.with_visibility(self.visibility)?;
            match self.mode {
                BsmMode::Full => Ok(e),
                BsmMode::PhiClassMerged => e.phi_class_merged(),
            }
        };
        Ok((finish(a)?, finish(b)?))
    }
}
