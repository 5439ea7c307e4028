//! Reconstructed experimental states and Bell-measurement effects.
//!
//! The matrices ship as matrix-JSON files under `fixtures/` and are also
//! embedded in the library. They are rounded to four decimals, so the states
//! carry a small trace error and the effects small negative eigenvalues; the
//! loaders repair or tolerate these explicitly.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::qcore::{BellState, CMatrix, DensityMatrix, RepairReport};
use crate::swapnet::EffectSet;
use crate::tolerance::Tolerances;

/// A reconstructed two-qubit state and the Bell state it approximates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateFixture {
    pub name: &'static str,
    pub copy: u8,
    pub target: BellState,
    /// Fidelity with `target` quoted alongside the reconstruction.
    pub reference_fidelity: f64,
    json: &'static str,
}

pub const STATE_FIXTURES: [StateFixture; 4] = [
    StateFixture {
        name: "copy1_phi_plus",
        copy: 1,
        target: BellState::PhiPlus,
        reference_fidelity: 0.9889,
        json: include_str!("../fixtures/copy1_phi_plus.json"),
    },
    StateFixture {
        name: "copy1_phi_minus",
        copy: 1,
        target: BellState::PhiMinus,
        reference_fidelity: 0.9901,
        json: include_str!("../fixtures/copy1_phi_minus.json"),
    },
    StateFixture {
        name: "copy2_phi_plus",
        copy: 2,
        target: BellState::PhiPlus,
        reference_fidelity: 0.9279,
        json: include_str!("../fixtures/copy2_phi_plus.json"),
    },
    StateFixture {
        name: "copy2_phi_minus",
        copy: 2,
        target: BellState::PhiMinus,
        reference_fidelity: 0.9319,
        json: include_str!("../fixtures/copy2_phi_minus.json"),
    },
];

/// A reconstructed Bell-measurement effect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectFixture {
    pub name: &'static str,
    /// 1 for the measurement on `A1A2`, 2 for `B1B2`.
    pub bsm: u8,
    pub target: BellState,
    json: &'static str,
}

macro_rules! effect_fixture {
    ($name:literal, $bsm:literal, $target:expr) => {
        EffectFixture {
            name: $name,
            bsm: $bsm,
            target: $target,
            json: include_str!(concat!("../fixtures/", $name, ".json")),
        }
    };
}

pub const EFFECT_FIXTURES: [EffectFixture; 8] = [
    effect_fixture!("bsm1_phi_plus", 1, BellState::PhiPlus),
    effect_fixture!("bsm1_phi_minus", 1, BellState::PhiMinus),
    effect_fixture!("bsm1_psi_plus", 1, BellState::PsiPlus),
    effect_fixture!("bsm1_psi_minus", 1, BellState::PsiMinus),
    effect_fixture!("bsm2_phi_plus", 2, BellState::PhiPlus),
    effect_fixture!("bsm2_phi_minus", 2, BellState::PhiMinus),
    effect_fixture!("bsm2_psi_plus", 2, BellState::PsiPlus),
    effect_fixture!("bsm2_psi_minus", 2, BellState::PsiMinus),
];

/// Mean effect fidelities quoted for the two reconstructed measurements.
pub const REFERENCE_BSM_FIDELITY: [f64; 2] = [0.9389, 0.9360];

impl StateFixture {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_json_str(self.json).expect("embedded fixture is valid matrix JSON")
    }

    /// Renormalized, positive state; the report records what was changed.
    pub fn state(&self) -> (DensityMatrix, RepairReport) {
        DensityMatrix::repair(&self.matrix()).expect("embedded fixture has positive weight")
    }
}

impl EffectFixture {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_json_str(self.json).expect("embedded fixture is valid matrix JSON")
    }
}

pub fn state_fixture(name: &str) -> Result<&'static StateFixture> {
    STATE_FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::invalid(format!("no state fixture named `{name}`")))
}

fn check_bsm(bsm: u8) -> Result<()> {
    if bsm == 1 || bsm == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "Bell measurement index {bsm} is not 1 or 2"
        )))
    }
}

fn assemble(bsm: u8, matrices: Vec<CMatrix>) -> Result<EffectSet> {
    let labels = EFFECT_FIXTURES
        .iter()
        .filter(|f| f.bsm == bsm)
        .map(|f| f.target.label().to_string())
        .collect();
    EffectSet::new(labels, matrices, &Tolerances::FIXTURE)
}

/// Embedded effects of measurement `bsm`, labelled like [`EffectSet::ideal_bsm`].
pub fn bsm_effects(bsm: u8) -> Result<EffectSet> {
    check_bsm(bsm)?;
    let matrices = EFFECT_FIXTURES
        .iter()
        .filter(|f| f.bsm == bsm)
        .map(EffectFixture::matrix)
        .collect();
    assemble(bsm, matrices)
}

/// Reads the effects of measurement `bsm` from `dir/bsm{bsm}_*.json`.
pub fn load_bsm_effects(dir: impl AsRef<Path>, bsm: u8) -> Result<EffectSet> {
    check_bsm(bsm)?;
    let matrices = EFFECT_FIXTURES
        .iter()
        .filter(|f| f.bsm == bsm)
        .map(|f| CMatrix::read_json(fixture_path(dir.as_ref(), f.name)))
        .collect::<Result<Vec<_>>>()?;
    assemble(bsm, matrices)
}

/// Reads and repairs `dir/{name}.json` for a known state fixture.
pub fn load_state(dir: impl AsRef<Path>, name: &str) -> Result<(DensityMatrix, RepairReport)> {
    let fixture = state_fixture(name)?;
    DensityMatrix::repair(&CMatrix::read_json(fixture_path(
        dir.as_ref(),
        fixture.name,
    ))?)
}

pub fn fixture_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.json"))
}

/// Writes all twelve embedded fixtures into `dir` as matrix-JSON.
pub fn write_all(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let entries = STATE_FIXTURES
        .iter()
        .map(|f| (f.name, f.json))
        .chain(EFFECT_FIXTURES.iter().map(|f| (f.name, f.json)));
    let mut written = Vec::new();
    for (name, json) in entries {
        let path = fixture_path(dir, name);
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::fidelity_pure;

    #[test]
    fn embedded_states_are_nearly_valid() {
        for f in &STATE_FIXTURES {
            let (rho, report) = f.state();
            assert!(
                (report.trace_before - 1.0).abs() <= 1e-4 + 1e-12,
                "{}",
                f.name
            );
            assert!(report.hermiticity_deviation < 1e-12);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let fid = fidelity_pure(&f.target.state(), &rho).unwrap();
            assert!(
                (fid - f.reference_fidelity).abs() < 5e-4,
                "{} {fid}",
                f.name
            );
        }
    }

    #[test]
    fn embedded_effects_load_under_fixture_tolerances() {
        for bsm in [1, 2] {
            let e = bsm_effects(bsm).unwrap();
            assert_eq!(e.labels(), ["phi+", "phi-", "psi+", "psi-"]);
            assert!(e.completeness_deviation() < 2e-2);
            let strict = EffectSet::new(
                e.labels().to_vec(),
                e.effects().to_vec(),
                &Tolerances::DEFAULT,
            );
            assert!(strict.is_err());
        }
        assert!(bsm_effects(3).is_err());
    }

    #[test]
    fn files_match_embedded_copies() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(write_all(dir.path()).unwrap().len(), 12);
        let loaded = load_bsm_effects(dir.path(), 2).unwrap();
        assert_eq!(loaded, bsm_effects(2).unwrap());
        let (rho, _) = load_state(dir.path(), "copy2_phi_minus").unwrap();
        assert_eq!(rho, STATE_FIXTURES[3].state().0);
        assert!(load_state(dir.path(), "nope").is_err());
        let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        assert_eq!(
            load_bsm_effects(&shipped, 1).unwrap(),
            bsm_effects(1).unwrap()
        );
    }
}
