//! Oscillator-bath model: a main oscillator of frequency `omega0` coupled
//! bilinearly to `N` bath oscillators through couplings `g_k`.
//!
//! Coordinates are indexed `0..=N`; index 0 is the main oscillator. The
//! whole quadratic potential is carried by the arrowhead matrix
//!
//! ```text
//!     | omega0^2  -g_1     ...  -g_N     |
//! B = | -g_1      omega1^2       0       |
//!     | ...                ...           |
//!     | -g_N      0        ...  omegaN^2 |
//! ```
//!
//! and every dynamical quantity downstream is a function of `B`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance to a bath pole below which [`char_g`] refuses to evaluate.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// One bath oscillator: its frequency and its coupling to the main oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub omega: f64,
    pub g: f64,
}

fn default_hbar() -> f64 {
    1.0
}

/// Raw, unvalidated model fields as read from a config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub omega0: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub baths: Vec<BathMode>,
}

/// A validated oscillator-bath model.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    omega0: f64,
    baths: Vec<BathMode>,
    hbar: f64,
}

impl Model {
    pub fn new(omega0: f64, baths: Vec<BathMode>, hbar: f64) -> Result<Self> {
        validate_model(&ModelSpec { omega0, hbar, baths })
    }

    /// Model with no bath and `hbar = 1`.
    pub fn single(omega0: f64) -> Result<Self> {
        Self::new(omega0, Vec::new(), 1.0)
    }

    /// Build from `(omega_k, g_k)` pairs with `hbar = 1`.
    pub fn from_pairs(omega0: f64, pairs: &[(f64, f64)]) -> Result<Self> {
        let baths = pairs.iter().map(|&(omega, g)| BathMode { omega, g }).collect();
        Self::new(omega0, baths, 1.0)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn baths(&self) -> &[BathMode] {
        &self.baths
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Number of bath modes `N`.
    pub fn n_bath(&self) -> usize {
        self.baths.len()
    }

    /// Number of coordinates `N + 1`.
    pub fn dim(&self) -> usize {
        self.baths.len() + 1
    }

    /// Same model with a different `hbar`.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(self.omega0, self.baths.clone(), hbar)
    }

    /// `omega0^2 - sum_k g_k^2 / omega_k^2`, the Schur complement of the bath
    /// block of `B`. Positive iff `B` is positive definite.
    pub fn schur_complement(&self) -> f64 {
        schur_complement(self.omega0, &self.baths)
    }

    pub fn build_b(&self) -> DMatrix<f64> {
        build_b(self)
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::from_matrix(self.build_b(), self.hbar)
    }
}

fn schur_complement(omega0: f64, baths: &[BathMode]) -> f64 {
    omega0 * omega0 - baths.iter().map(|b| b.g * b.g / (b.omega * b.omega)).sum::<f64>()
}

/// Check frequencies, `hbar` and positive-definiteness of `B`.
pub fn validate_model(spec: &ModelSpec) -> Result<Model> {
    let finite_pos = |x: f64| x.is_finite() && x > 0.0;
    if !finite_pos(spec.omega0) {
        return Err(Error::NonPositiveFrequency { what: "omega0".into(), value: spec.omega0 });
    }
    for (k, b) in spec.baths.iter().enumerate() {
        if !finite_pos(b.omega) {
            return Err(Error::NonPositiveFrequency {
                what: format!("omega_{}", k + 1),
                value: b.omega,
            });
        }
        if !b.g.is_finite() {
            return Err(Error::InvalidInput(format!("coupling g_{} is not finite", k + 1)));
        }
    }
    if !finite_pos(spec.hbar) {
        return Err(Error::NonPositiveHbar(spec.hbar));
    }
    let schur = schur_complement(spec.omega0, &spec.baths);
    if !(schur > 0.0) {
        return Err(Error::UnstableModel { schur_complement: schur });
    }
    Ok(Model { omega0: spec.omega0, baths: spec.baths.clone(), hbar: spec.hbar })
}

/// The symmetric arrowhead coupling matrix `B`.
pub fn build_b(model: &Model) -> DMatrix<f64> {
    let n = model.dim();
    let mut b = DMatrix::zeros(n, n);
    b[(0, 0)] = model.omega0 * model.omega0;
    for (k, mode) in model.baths.iter().enumerate() {
        b[(k + 1, k + 1)] = mode.omega * mode.omega;
        b[(0, k + 1)] = -mode.g;
        b[(k + 1, 0)] = -mode.g;
    }
    b
}

/// Normal-mode decomposition of `B`: `X^T B X = diag(z_alpha^2)`.
///
/// `z` is ascending and each column of `X` is signed so that its entry on
/// the main oscillator is non-negative (first non-zero entry positive when
/// that entry vanishes).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    z: DVector<f64>,
    x: DMatrix<f64>,
    b: DMatrix<f64>,
    hbar: f64,
}

impl Spectrum {
    pub fn from_matrix(b: DMatrix<f64>, hbar: f64) -> Result<Self> {
        let n = b.nrows();
        if b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.ncols() });
        }
        let eig = SymmetricEigen::try_new(b.clone(), f64::EPSILON, 10_000)
            .ok_or(Error::EigenFailure)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let mut z = DVector::zeros(n);
        let mut x = DMatrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[src];
            if !(lambda > 0.0) {
                return Err(Error::NonPositiveEigenvalue { mode: col, value: lambda });
            }
            z[col] = lambda.sqrt();
            let mut v = eig.eigenvectors.column(src).into_owned();
            let pivot = if v[0].abs() > 1e-14 {
                v[0]
            } else {
                v.iter().copied().find(|e| e.abs() > 1e-14).unwrap_or(1.0)
            };
            if pivot < 0.0 {
                v.neg_mut();
            }
            x.set_column(col, &v);
        }
        Ok(Self { z, x, b, hbar })
    }

    /// Normal-mode frequencies `z_alpha`, ascending.
    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    /// Orthogonal eigenvector matrix; column `alpha` belongs to `z_alpha`.
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// The coupling matrix `B` this spectrum decomposes.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// `X diag(f(z_alpha)) X^T`.
    pub fn mode_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = self.z.map(f);
        let scaled = &self.x * DMatrix::from_diagonal(&d);
        scaled * self.x.transpose()
    }

    /// Same spectrum with a different `hbar` (the matrix `B` is unchanged).
    pub fn with_hbar(&self, hbar: f64) -> Self {
        Self { hbar, ..self.clone() }
    }
}

/// Characteristic function `g(z) = z^2 - omega0^2 - sum_k g_k^2/(z^2 - omega_k^2)`
/// evaluated at `z2 = z^2`. Its zeros are the eigenvalues of `B`.
pub fn char_g(model: &Model, z2: f64) -> Result<f64> {
    let mut sum = 0.0;
    for (k, b) in model.baths.iter().enumerate() {
        let w2 = b.omega * b.omega;
        if (z2 - w2).abs() <= POLE_TOLERANCE * w2 {
            return Err(Error::PoleInput { z2, mode: k + 1 });
        }
        sum += b.g * b.g / (z2 - w2);
    }
    Ok(z2 - model.omega0 * model.omega0 - sum)
}

/// Bath susceptibility `chi(t) = sum_k g_k^2 sin(omega_k t) / omega_k`.
pub fn susceptibility(model: &Model, t: f64) -> f64 {
    model.baths.iter().map(|b| b.g * b.g * (b.omega * t).sin() / b.omega).sum()
}

/// Laplace transform of the susceptibility, `sum_k g_k^2 / (s^2 + omega_k^2)`.
pub fn susceptibility_laplace(model: &Model, s: f64) -> f64 {
    model.baths.iter().map(|b| b.g * b.g / (s * s + b.omega * b.omega)).sum()
}

/// Argument of [`green`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreenArg {
    /// Laplace variable `s` (real).
    Laplace(f64),
    /// Real frequency `omega`.
    Frequency(f64),
}

/// Green function of the main-oscillator Langevin equation.
///
/// `Laplace(s)` gives `1/(s^2 + omega0^2 - sum g_k^2/(s^2 + omega_k^2))`;
/// `Frequency(w)` gives `-1/g(w)`, which is the Laplace form at `s = i w`.
pub fn green(model: &Model, arg: GreenArg) -> Result<f64> {
    let denominator = match arg {
        GreenArg::Laplace(s) => green_denominator_s2(model, s * s),
        GreenArg::Frequency(w) => -char_g(model, w * w).map_err(|_| Error::AtPole {
            denominator: f64::INFINITY,
        })?,
    };
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(Error::AtPole { denominator });
    }
    Ok(1.0 / denominator)
}

/// `s^2 + omega0^2 - sum g_k^2/(s^2 + omega_k^2)` as a function of `s^2`;
/// `s^2` may be negative (imaginary `s`).
pub fn green_denominator_s2(model: &Model, s2: f64) -> f64 {
    s2 + model.omega0 * model.omega0
        - model.baths.iter().map(|b| b.g * b.g / (s2 + b.omega * b.omega)).sum::<f64>()
}

/// Coefficients of the noise operator: `c_k = g_k cos(omega_k t)` multiplies
/// `Y_k(0)` and `s_k = g_k sin(omega_k t)/omega_k` multiplies `P_k(0)`.
pub fn noise_coefficients(model: &Model, t: f64) -> (DVector<f64>, DVector<f64>) {
    let c = DVector::from_iterator(
        model.n_bath(),
        model.baths.iter().map(|b| b.g * (b.omega * t).cos()),
    );
    let s = DVector::from_iterator(
        model.n_bath(),
        model.baths.iter().map(|b| b.g * (b.omega * t).sin() / b.omega),
    );
    (c, s)
}

/// Symmetrized noise correlation `<{U(t), U(t')}>/2` for a bath in thermal
/// equilibrium at inverse temperature `beta`.
pub fn thermal_noise_correlation(model: &Model, beta: f64, t: f64, t_prime: f64) -> f64 {
    let hbar = model.hbar;
    model
        .baths
        .iter()
        .map(|b| {
            let x = beta * hbar * b.omega / 2.0;
            b.g * b.g * hbar / (2.0 * b.omega) / x.tanh() * (b.omega * (t - t_prime)).cos()
        })
        .sum()
}
