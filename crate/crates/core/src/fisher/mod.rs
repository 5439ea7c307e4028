//! The family of quantum Fisher informations for unitary phase encoding.
//!
//! Every member is indexed by a symmetric, normalized operator-monotone
//! function `f` and, for `rho = sum_i l_i |i><i|`, reads
//!
//! ```text
//! I_f(rho, H) = 1/4 sum_{i,j} (l_i - l_j)^2 / (l_j f(l_i / l_j)) |<i|H|j>|^2
//! ```
//!
//! with degenerate pairs contributing zero. The SLD member `f(x) = (1 + x)/2`
//! is the smallest regular one; [`sldf`] evaluates it through its own closed
//! form so the two routes can be checked against each other.

mod channels;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use channels::{block_ensemble, CovariantChannel};

use crate::error::{Error, Result};
use crate::qcore::{CMatrix, DensityMatrix, Spectrum};
use crate::tolerance::Tolerances;

/// Symmetric, normalized operator-monotone function selecting one member of
/// the family.
#[derive(Clone)]
pub struct CmFunction {
    name: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    at_zero: f64,
}

impl fmt::Debug for CmFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CmFunction")
            .field("name", &self.name)
            .field("at_zero", &self.at_zero)
            .finish()
    }
}

impl CmFunction {
    /// Wraps an arbitrary function. Nothing is validated here; see
    /// [`check_cm_function`].
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        at_zero: f64,
    ) -> Self {
        CmFunction {
            name: name.into(),
            eval: Arc::new(eval),
            at_zero,
        }
    }

    /// `f(x) = (1 + x) / 2`, giving the SLD quantum Fisher information.
    pub fn sld() -> Self {
        CmFunction::new("sld", |x| (1.0 + x) / 2.0, 0.5)
    }

    /// `f(x) = ((1 + sqrt x) / 2)^2`, giving (twice) the Wigner-Yanase skew information.
    pub fn wigner_yanase() -> Self {
        CmFunction::new(
            "wigner-yanase",
            |x| {
                let r = (1.0 + x.sqrt()) / 2.0;
                r * r
            },
            0.25,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            self.at_zero
        } else {
            (self.eval)(x)
        }
    }

    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn is_regular(&self) -> bool {
        self.at_zero > 0.0
    }

    /// `l_j f(l_i / l_j)` evaluated through the larger eigenvalue, which the
    /// symmetry `f(x) = x f(1/x)` allows and which keeps the ratio in `[0, 1]`.
    fn mean(&self, a: f64, b: f64) -> Result<f64> {
        let (large, small) = if a >= b { (a, b) } else { (b, a) };
        if small <= 0.0 {
            if !self.is_regular() {
                return Err(Error::NonRegularMetric { eigenvalue: large });
            }
            return Ok(large * self.at_zero);
        }
        Ok(large * self.eval(small / large))
    }
}

/// Maximum violations of the defining properties on a sample grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmReport {
    pub name: String,
    /// `|f(1) - 1|`.
    pub normalization: f64,
    /// `max |f(x) - x f(1/x)| / max(1, |f(x)|)`.
    pub symmetry: f64,
    /// `max (f(x_k) - f(x_{k+1}))^+` over the sorted grid.
    pub monotonicity: f64,
    /// `max(0, -f(0))`.
    pub negativity_at_zero: f64,
}

impl CmReport {
    pub fn max_violation(&self) -> f64 {
        self.normalization
            .max(self.symmetry)
            .max(self.monotonicity)
            .max(self.negativity_at_zero)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Grid `2^(k/4)` for `k = -40..=40`, covering `[2^-10, 2^10]`.
pub fn default_grid() -> Vec<f64> {
    (-40..=40).map(|k| 2f64.powf(k as f64 / 4.0)).collect()
}

pub fn check_cm_function(f: &CmFunction, grid: &[f64]) -> CmReport {
    let normalization = (f.eval(1.0) - 1.0).abs();
    let symmetry = grid
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let fx = f.eval(x);
            (fx - x * f.eval(1.0 / x)).abs() / fx.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    let mut sorted: Vec<f64> = grid.iter().copied().filter(|&x| x > 0.0).collect();
    sorted.sort_by(f64::total_cmp);
    let monotonicity = sorted
        .windows(2)
        .map(|w| (f.eval(w[0]) - f.eval(w[1])).max(0.0))
        .fold(0.0, f64::max);
    CmReport {
        name: f.name.clone(),
        normalization,
        symmetry,
        monotonicity,
        negativity_at_zero: (-f.at_zero).max(0.0),
    }
}

/// Tolerance used when [`qfi_f`] screens its function argument.
const FUNCTION_SCREEN_TOL: f64 = 1e-10;

fn screen(f: &CmFunction) -> Result<()> {
    let coarse: Vec<f64> = (-10..=10).map(|k| 2f64.powi(k)).collect();
    let report = check_cm_function(f, &coarse);
    if !report.passes(FUNCTION_SCREEN_TOL) {
        return Err(Error::InvalidFunction {
            name: f.name.clone(),
            reason: format!(
                "normalization {:.2e}, symmetry {:.2e}, monotonicity {:.2e}",
                report.normalization, report.symmetry, report.monotonicity
            ),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QfiResult {
    pub value: f64,
    pub f_used: String,
}

fn check_generator(rho: &DensityMatrix, h: &CMatrix) -> Result<()> {
    rho.matrix().ensure_same_dim(h)?;
    h.ensure_hermitian(Tolerances::DEFAULT.validation)
}

/// `H` in the eigenbasis of `rho`, with the eigenvalues clipped at zero.
/// Eigenvalues within the degeneracy tolerance of zero are set to zero: they
/// are rounding noise, which square-root means would amplify to `~1e-8`.
fn spectral_terms(rho: &DensityMatrix, h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let spectrum: &Spectrum = rho.spectrum();
    let floor = Tolerances::DEFAULT.degeneracy;
    let lambda = rho
        .clipped_eigenvalues()
        .into_iter()
        .map(|l| if l <= floor { 0.0 } else { l })
        .collect();
    (lambda, spectrum.in_eigenbasis(h))
}

pub fn qfi_f(rho: &DensityMatrix, h: &CMatrix, f: &CmFunction) -> Result<QfiResult> {
    check_generator(rho, h)?;
    screen(f)?;
    let (lambda, h_eig) = spectral_terms(rho, h);
    let d = lambda.len();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            let gap = lambda[i] - lambda[j];
            if gap.abs() <= Tolerances::DEFAULT.degeneracy {
                continue;
            }
            let weight = h_eig.get(i, j).norm_sqr();
            if weight == 0.0 {
                continue;
            }
            sum += gap * gap / f.mean(lambda[i], lambda[j])? * weight;
        }
    }
    Ok(QfiResult {
        value: (0.25 * sum).max(0.0),
        f_used: f.name.clone(),
    })
}

/// SLD quantum Fisher information,
/// `1/2 sum_{i,j} (l_i - l_j)^2 / (l_i + l_j) |<i|H|j>|^2`.
pub fn sldf(rho: &DensityMatrix, h: &CMatrix) -> Result<f64> {
    check_generator(rho, h)?;
    let (lambda, h_eig) = spectral_terms(rho, h);
    let d = lambda.len();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            let gap = lambda[i] - lambda[j];
            if gap.abs() <= Tolerances::DEFAULT.degeneracy {
                continue;
            }
            sum += gap * gap / (lambda[i] + lambda[j]) * h_eig.get(i, j).norm_sqr();
        }
    }
    Ok((0.5 * sum).max(0.0))
}

/// `<H^2> - <H>^2`.
pub fn variance(rho: &DensityMatrix, h: &CMatrix) -> Result<f64> {
    check_generator(rho, h)?;
    let mean = rho.expectation(h)?;
    let second = rho.expectation(&(h * h))?;
    Ok((second - mean * mean).max(0.0))
}
