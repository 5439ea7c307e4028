//! Maximum-likelihood reconstruction of states and of measurement effects.

mod mle;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use mle::{mle_detector, mle_state, MleOptions, TomographyResult};

use crate::error::{Error, Result};
use crate::qcore::{eig_hermitian, psd_sqrt, CMatrix, PureState};
use crate::swapnet::EffectSet;
use crate::tolerance::Tolerances;

/// Single-qubit polarization probe `H, V, D, A, R, L`.
pub fn polarization_state(label: char) -> Result<PureState> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let amps = match label {
        'H' => vec![c(1.0, 0.0), c(0.0, 0.0)],
        'V' => vec![c(0.0, 0.0), c(1.0, 0.0)],
        'D' => vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        'A' => vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
        'R' => vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)],
        'L' => vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)],
        other => return Err(Error::invalid(format!("unknown polarization `{other}`"))),
    };
    PureState::new(amps)
}

pub const POLARIZATIONS: [char; 6] = ['H', 'V', 'D', 'A', 'R', 'L'];

/// Labelled product probe states, one polarization letter per qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSet {
    labels: Vec<String>,
    states: Vec<PureState>,
}

impl ProbeSet {
    /// Probes such as `"HD"` or `"RL"`; every label must have the same length.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let first = labels
            .first()
            .ok_or_else(|| Error::invalid("probe set must not be empty"))?;
        let n = first.as_ref().chars().count();
        if n == 0 {
            return Err(Error::invalid("probe labels must not be empty"));
        }
        let mut states = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            if label.chars().count() != n {
                return Err(Error::invalid(format!(
                    "probe `{label}` does not have {n} qubits"
                )));
            }
            let factors = label
                .chars()
                .map(polarization_state)
                .collect::<Result<Vec<_>>>()?;
            states.push(PureState::product(&factors));
        }
        Ok(ProbeSet {
            labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            states,
        })
    }

    /// Arbitrary labelled probe states of a common dimension.
    pub fn from_states(labels: Vec<String>, states: Vec<PureState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("probe set must not be empty"));
        }
        if labels.len() != states.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} probe states",
                labels.len(),
                states.len()
            )));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(ProbeSet { labels, states })
    }

    /// All `6^n` products of the six polarizations.
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::invalid(format!(
                "probe qubit count {n} outside 1..=4"
            )));
        }
        let mut labels = vec![String::new()];
        for _ in 0..n {
            labels = labels
                .iter()
                .flat_map(|l| POLARIZATIONS.iter().map(move |c| format!("{l}{c}")))
                .collect();
        }
        ProbeSet::from_labels(&labels)
    }

    /// The 36 two-qubit probes.
    pub fn two_qubit() -> Self {
        ProbeSet::complete(2).expect("two-qubit probes are valid")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }
}

/// Projective measurement of every qubit in the Pauli basis named by
/// `setting` (letters `X`, `Y`, `Z`). Outcome labels are strings of `+`/`-`.
pub fn pauli_setting(setting: &str) -> Result<EffectSet> {
    let n = setting.chars().count();
    if n == 0 {
        return Err(Error::invalid("empty measurement setting"));
    }
    let eigenstates = setting
        .chars()
        .map(|axis| {
            let (plus, minus) = match axis {
                'X' => ('D', 'A'),
                'Y' => ('R', 'L'),
                'Z' => ('H', 'V'),
                other => return Err(Error::invalid(format!("unknown Pauli axis `{other}`"))),
            };
            Ok([polarization_state(plus)?, polarization_state(minus)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = Vec::with_capacity(1 << n);
    let mut effects = Vec::with_capacity(1 << n);
    for outcome in 0..(1usize << n) {
        let bits: Vec<usize> = (0..n).map(|q| (outcome >> (n - 1 - q)) & 1).collect();
        labels.push(
            bits.iter()
                .map(|&b| if b == 0 { '+' } else { '-' })
                .collect(),
        );
        let factors: Vec<PureState> = bits
            .iter()
            .zip(&eigenstates)
            .map(|(&b, pair)| pair[b].clone())
            .collect();
        effects.push(PureState::product(&factors).projector());
    }
    EffectSet::new(labels, effects, &Tolerances::DEFAULT)
}

/// The `3^n` Pauli settings, `"XX"`, `"XY"`, ...
pub fn pauli_settings(n: usize) -> Result<Vec<(String, EffectSet)>> {
    let mut names = vec![String::new()];
    for _ in 0..n {
        names = names
            .iter()
            .flat_map(|s| ['X', 'Y', 'Z'].into_iter().map(move |c| format!("{s}{c}")))
            .collect();
    }
    names
        .into_iter()
        .map(|name| {
            let set = pauli_setting(&name)?;
            Ok((name, set))
        })
        .collect()
}

/// Fidelity of the trace-normalized operators, `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
/// Eigenvalues slightly below zero (reconstructions) are clipped.
pub fn operator_fidelity(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    a.ensure_same_dim(b)?;
    let normalize = |m: &CMatrix| -> Result<CMatrix> {
        m.ensure_hermitian(Tolerances::FIXTURE.effect_psd)?;
        let h = m.hermitian_part();
        let tr = h.trace().re;
        if tr.abs() < 1e-15 {
            return Err(Error::invalid("operator has zero trace"));
        }
        let min = eig_hermitian(&h)?.min_eigenvalue();
        if min < -Tolerances::FIXTURE.effect_psd * tr {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(h.scale(1.0 / tr))
    };
    let a = normalize(a)?;
    let b = normalize(b)?;
    let root = psd_sqrt(&a)?;
    let inner = (&(&root * &b) * &root).hermitian_part();
    let spectrum = eig_hermitian(&inner)?;
    let trace: f64 = spectrum
        .eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok((trace * trace).min(1.0))
}

/// Dimension of the real span of the given Hermitian operators.
pub fn operator_span_rank(ops: &[CMatrix]) -> usize {
    let Some(first) = ops.first() else {
        return 0;
    };
    let d = first.dim();
    let mut columns = DMatrix::<f64>::zeros(d * d, ops.len());
    for (k, op) in ops.iter().enumerate() {
        let h = op.hermitian_part();
        let mut row = 0;
        for i in 0..d {
            for j in i..d {
                let z = h.get(i, j);
                if i == j {
                    columns[(row, k)] = z.re;
                    row += 1;
                } else {
                    columns[(row, k)] = z.re;
                    columns[(row + 1, k)] = z.im;
                    row += 2;
                }
            }
        }
    }
    let svd = columns.svd(false, false);
    let max = svd.singular_values.max();
    if max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * max)
        .count()
}

pub(crate) fn ensure_complete(ops: &[CMatrix], d: usize) -> Result<()> {
    let rank = operator_span_rank(ops);
    if rank < d * d {
        return Err(Error::RankDeficient {
            rank,
            required: d * d,
        });
    }
    Ok(())
}

/// Count file: setting or probe label mapped to outcome label and count.
pub type CountFile = BTreeMap<String, BTreeMap<String, f64>>;

pub fn read_count_file(path: impl AsRef<Path>) -> Result<CountFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// State-tomography data from a count file keyed by Pauli settings.
pub fn state_data(file: &CountFile) -> Result<Vec<(EffectSet, Vec<f64>)>> {
    file.iter()
        .map(|(setting, outcomes)| {
            let effects = pauli_setting(setting)?;
            let counts = effects
                .labels()
                .iter()
                .map(|l| outcomes.get(l).copied().unwrap_or(0.0))
                .collect();
            if let Some(extra) = outcomes.keys().find(|k| effects.index_of(k).is_none()) {
                return Err(Error::invalid(format!(
                    "setting `{setting}` has unknown outcome `{extra}`"
                )));
            }
            Ok((effects, counts))
        })
        .collect()
}

/// Detector-tomography data from a count file keyed by probe labels, with
/// the outcomes in `outcomes` order.
pub fn detector_data<S: AsRef<str>>(
    file: &CountFile,
    outcomes: &[S],
) -> Result<(ProbeSet, Vec<Vec<f64>>)> {
    let labels: Vec<&String> = file.keys().collect();
    let probes = ProbeSet::from_labels(&labels)?;
    let counts = file
        .values()
        .map(|row| {
            if let Some(extra) = row
                .keys()
                .find(|k| !outcomes.iter().any(|o| o.as_ref() == *k))
            {
                return Err(Error::invalid(format!("unknown outcome `{extra}`")));
            }
            Ok(outcomes
                .iter()
                .map(|o| row.get(o.as_ref()).copied().unwrap_or(0.0))
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((probes, counts))
}
