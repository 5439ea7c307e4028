//! Single-qubit gates as quarter-half-quarter waveplate sequences.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{spin_half, unitary_of, SpinAxis};
use crate::error::{Error, Result};
use crate::qcore::{pauli, CMatrix};
use crate::speed::DEFAULT_TAU;
use crate::tolerance::Tolerances;

/// Euler triple for `exp(-i xi sy/2) exp(-i eta sx/2) exp(-i zeta sy/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl EulerAngles {
    pub fn new(xi: f64, eta: f64, zeta: f64) -> Self {
        EulerAngles { xi, eta, zeta }
    }
}

/// Plate angles, applied in the order `theta1` (first QWP), `theta2` (HWP),
/// `theta3` (second QWP). Each angle is kept in `[0, pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSequence {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

fn reduce_mod_pi(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    // rem_euclid can return PI itself for tiny negative inputs.
    if r >= PI {
        0.0
    } else {
        r
    }
}

impl WaveplateSequence {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        WaveplateSequence {
            theta1: reduce_mod_pi(theta1),
            theta2: reduce_mod_pi(theta2),
            theta3: reduce_mod_pi(theta3),
        }
    }

    pub fn radians(&self) -> [f64; 3] {
        [self.theta1, self.theta2, self.theta3]
    }

    pub fn degrees(&self) -> [f64; 3] {
        self.radians().map(f64::to_degrees)
    }

    /// `Q(theta3) H(theta2) Q(theta1)`.
    pub fn unitary(&self, convention: JonesConvention) -> CMatrix {
        let q1 = convention.qwp(self.theta1);
        let h = convention.hwp(self.theta2);
        let q3 = convention.qwp(self.theta3);
        &(&q3 * &h) * &q1
    }

    /// Same plates traversed in the opposite order, `Q(theta1) H(theta2) Q(theta3)`.
    pub fn reversed_unitary(&self, convention: JonesConvention) -> CMatrix {
        WaveplateSequence::new(self.theta3, self.theta2, self.theta1).unitary(convention)
    }
}

/// Jones-matrix convention for the plates.
///
/// `HorizontalVertical` writes plate matrices in the H/V polarization basis
/// with the fast axis at angle `theta` from horizontal. `DiagonalFrame` is the
/// same plates expressed in the basis rotated by `exp(-i pi sy / 4)`, which
/// exchanges the roles of `sz` and `sx`. [`decompose`] targets
/// `DiagonalFrame`; the two conventions agree on the identity sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JonesConvention {
    #[default]
    HorizontalVertical,
    DiagonalFrame,
}

impl JonesConvention {
    pub const ALL: [JonesConvention; 2] = [
        JonesConvention::HorizontalVertical,
        JonesConvention::DiagonalFrame,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JonesConvention::HorizontalVertical => "horizontal_vertical",
            JonesConvention::DiagonalFrame => "diagonal_frame",
        }
    }

    pub fn qwp(self, theta: f64) -> CMatrix {
        self.to_frame(qwp(theta))
    }

    pub fn hwp(self, theta: f64) -> CMatrix {
        self.to_frame(hwp(theta))
    }

    fn to_frame(self, m: CMatrix) -> CMatrix {
        match self {
            JonesConvention::HorizontalVertical => m,
            JonesConvention::DiagonalFrame => m.conjugate_by(&frame_change()),
        }
    }
}

impl fmt::Display for JonesConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JonesConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "horizontal_vertical" | "hv" => Ok(JonesConvention::HorizontalVertical),
            "diagonal_frame" | "diagonal" => Ok(JonesConvention::DiagonalFrame),
            other => Err(Error::invalid(format!(
                "unknown Jones convention `{other}`"
            ))),
        }
    }
}

/// `exp(-i pi sy / 4)`, a real rotation by `pi/4`.
fn frame_change() -> CMatrix {
    let c = FRAC_PI_4.cos();
    let s = FRAC_PI_4.sin();
    real_matrix([[c, -s], [s, c]])
}

fn real_matrix(rows: [[f64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, |i, j| Complex64::new(rows[i][j], 0.0))
}

/// Quarter-wave plate with fast axis at `theta`, H/V basis:
/// `R(theta) diag(1, i) R(-theta)`.
pub fn qwp(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    let off = Complex64::new(s * c, -s * c);
    let mut m = CMatrix::zeros(2);
    m.set(0, 0, Complex64::new(c * c, s * s));
    m.set(0, 1, off);
    m.set(1, 0, off);
    m.set(1, 1, Complex64::new(s * s, c * c));
    m
}

/// Half-wave plate with fast axis at `theta`, H/V basis, global phase dropped.
pub fn hwp(theta: f64) -> CMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    real_matrix([[c, s], [s, -c]])
}

pub fn euler_unitary(e: EulerAngles) -> CMatrix {
    let ry = |angle: f64| rotation(&pauli::y(), angle);
    let rx = rotation(&pauli::x(), e.eta);
    &(&ry(e.xi) * &rx) * &ry(e.zeta)
}

/// `exp(-i angle sigma / 2)` for a Pauli matrix `sigma`.
fn rotation(sigma: &CMatrix, angle: f64) -> CMatrix {
    let half = angle / 2.0;
    &CMatrix::identity(2).scale(half.cos()) + &sigma.scale_complex(Complex64::new(0.0, -half.sin()))
}

/// Plate angles realizing `euler_unitary(e)` up to global phase under
/// [`JonesConvention::DiagonalFrame`].
pub fn decompose(e: EulerAngles) -> WaveplateSequence {
    WaveplateSequence::new(
        FRAC_PI_4 - e.zeta / 2.0,
        -FRAC_PI_4 + (e.xi + e.eta - e.zeta) / 4.0,
        FRAC_PI_4 + e.xi / 2.0,
    )
}

/// Whether `u = exp(i phi) v` for some phase, within `tol` in max-entry norm.
/// The phase is read off the largest entry of `v`.
pub fn equal_up_to_phase(u: &CMatrix, v: &CMatrix, tol: f64) -> Result<bool> {
    u.ensure_same_dim(v)?;
    let unitarity = Tolerances::DEFAULT.unitarity;
    u.ensure_unitary(unitarity)?;
    v.ensure_unitary(unitarity)?;
    let n = v.dim();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..n {
        for j in 0..n {
            let a = v.get(i, j).norm();
            if a > best {
                (bi, bj, best) = (i, j, a);
            }
        }
    }
    let ratio = u.get(bi, bj) / v.get(bi, bj);
    if ratio.norm() == 0.0 {
        return Ok(false);
    }
    let phase = ratio / ratio.norm();
    Ok(u.max_abs_diff(&v.scale_complex(phase)) <= tol)
}

/// Reference plate settings: identity and `exp(-i h tau)` for `h = s_axis / 2`,
/// `tau = pi/6`.
pub const REFERENCE_GATES: [(&str, Option<SpinAxis>, [f64; 3]); 4] = [
    ("I", None, [FRAC_PI_4, FRAC_PI_4, FRAC_PI_4]),
    ("U_X", Some(SpinAxis::X), [FRAC_PI_2, -PI / 24.0, FRAC_PI_2]),
    (
        "U_Y",
        Some(SpinAxis::Y),
        [FRAC_PI_4, 5.0 * PI / 24.0, PI / 6.0],
    ),
    (
        "U_Z",
        Some(SpinAxis::Z),
        [FRAC_PI_4, 5.0 * PI / 24.0, FRAC_PI_4],
    ),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCheck {
    pub row: String,
    pub convention: JonesConvention,
    pub angles: [f64; 3],
    /// `Q(t3) H(t2) Q(t1)` equals the target gate.
    pub forward: bool,
    /// The sequence equals the adjoint of the target gate.
    pub adjoint: bool,
    /// The reversed sequence equals the target gate.
    pub reversed: bool,
}

/// Checks every published row against its target under every convention.
pub fn reference_gate_report(tol: f64) -> Result<Vec<GateCheck>> {
    let mut out = Vec::new();
    for (row, axis, angles) in REFERENCE_GATES {
        let target = match axis {
            Some(axis) => unitary_of(&spin_half(axis), DEFAULT_TAU)?,
            None => CMatrix::identity(2),
        };
        let seq = WaveplateSequence::new(angles[0], angles[1], angles[2]);
        for convention in JonesConvention::ALL {
            let u = seq.unitary(convention);
            out.push(GateCheck {
                row: row.to_string(),
                convention,
                angles,
                forward: equal_up_to_phase(&u, &target, tol)?,
                adjoint: equal_up_to_phase(&u, &target.adjoint(), tol)?,
                reversed: equal_up_to_phase(&seq.reversed_unitary(convention), &target, tol)?,
            });
        }
    }
    Ok(out)
}
