//! Gaussian-state calculus.
//!
//! Two layers live here. [`GaussianForm`] is a complex Gaussian
//! `exp(log_scale - w.Q.w/2 + j.w)` that can be integrated over any subset of
//! its variables in closed form; it carries the position-representation
//! algebra. [`GaussianState`] holds first and second moments over phase space
//! ordered `(y_0..y_N, p_0..p_N)` and is evolved by the linear symplectic flow.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matfun::{coth, MatFun};
use crate::model::Model;
use crate::propagator::DriveDisplacements;
use crate::reduced::ReducedGaussian;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Smallest eigenvalue of `Re Gamma`, relative to its largest, accepted as positive.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-12;

fn ln_two_pi() -> f64 {
    (2.0 * std::f64::consts::PI).ln()
}

/// `ln det(Gamma)^{-1/2}` for complex symmetric `Gamma` with positive definite real part.
///
/// Writing `Gamma = P^{1/2} (I + i S) P^{1/2}` with `S = P^{-1/2} Im(Gamma) P^{-1/2}`
/// real symmetric, `det Gamma = det P * prod (1 + i mu_k)`. Each factor takes
/// the principal root, which is the branch continuous along
/// `Re Gamma + i s Im Gamma`, `s` in `[0, 1]`. This is the same branch as taking
/// principal roots of the eigenvalues of `Gamma`, all of which lie in the right
/// half plane.
pub fn ln_inv_sqrt_det(gamma: &CMatrix) -> Result<Complex64> {
    let n = gamma.nrows();
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let re = symmetrize(&gamma.map(|c| c.re));
    let im = symmetrize(&gamma.map(|c| c.im));
    let eig = re.clone().symmetric_eigen();
    let pmax = eig.eigenvalues.amax();
    let pmin = eig.eigenvalues.min();
    if !(pmin > CONVERGENCE_TOLERANCE * pmax.max(1e-300)) || !pmin.is_finite() {
        return Err(Error::NonConvergentGaussian(format!(
            "real part not positive definite (smallest eigenvalue {pmin:e}, largest {pmax:e})"
        )));
    }
    let inv_sqrt = eig.eigenvalues.map(|p| 1.0 / p.sqrt());
    let p_inv_half =
        &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let s = symmetrize(&(&p_inv_half * im * &p_inv_half));
    let mu = s.symmetric_eigenvalues();
    let mut acc = Complex64::new(-0.5 * eig.eigenvalues.iter().map(|p| p.ln()).sum::<f64>(), 0.0);
    for m in mu.iter() {
        acc -= 0.5 * Complex64::new(1.0, *m).ln();
    }
    Ok(acc)
}

fn symmetrize<T>(m: &DMatrix<T>) -> DMatrix<T>
where
    T: nalgebra::Scalar + Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
}

/// `int d^n x exp(-x.Gamma.x/2 + j.x) = (2 pi)^{n/2} det(Gamma)^{-1/2} exp(j.Gamma^{-1}.j/2)`.
pub fn gaussian_integral(gamma: &CMatrix, j: &CVector) -> Result<Complex64> {
    let n = gamma.nrows();
    if gamma.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: gamma.ncols() });
    }
    if j.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: j.len() });
    }
    let ln_det = ln_inv_sqrt_det(gamma)?;
    let sol = gamma
        .clone()
        .lu()
        .solve(j)
        .ok_or_else(|| Error::NonConvergentGaussian("singular Gamma".into()))?;
    let quad = j.dot(&sol);
    Ok((0.5 * n as f64 * ln_two_pi() + ln_det + 0.5 * quad).exp())
}

/// `exp(log_scale - w.q.w/2 + lin.w)` over complex variables `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianForm {
    pub q: CMatrix,
    pub lin: CVector,
    pub log_scale: Complex64,
}

impl GaussianForm {
    pub fn zeros(n: usize) -> Self {
        Self {
            q: CMatrix::zeros(n, n),
            lin: CVector::zeros(n),
            log_scale: Complex64::new(0.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    /// Add `c * w_i * w_j` to the exponent (`i == j` gives `c * w_i^2`).
    pub fn add_bilinear(&mut self, i: usize, j: usize, c: Complex64) {
        if i == j {
            self.q[(i, i)] -= 2.0 * c;
        } else {
            self.q[(i, j)] -= c;
            self.q[(j, i)] -= c;
        }
    }

    /// Add `c * w_i` to the exponent.
    pub fn add_linear(&mut self, i: usize, c: Complex64) {
        self.lin[i] += c;
    }

    pub fn exponent(&self, w: &CVector) -> Complex64 {
        self.log_scale - 0.5 * w.dot(&(&self.q * w)) + self.lin.dot(w)
    }

    pub fn evaluate(&self, w: &CVector) -> Complex64 {
        self.exponent(w).exp()
    }

    pub fn evaluate_real(&self, w: &[f64]) -> Complex64 {
        let w = CVector::from_iterator(w.len(), w.iter().map(|&x| Complex64::new(x, 0.0)));
        self.evaluate(&w)
    }

    /// Integrate over the listed variables; the rest keep their relative order.
    pub fn integrate_out(&self, vars: &[usize]) -> Result<GaussianForm> {
        let n = self.dim();
        if let Some(&bad) = vars.iter().find(|&&v| v >= n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad + 1 });
        }
        let keep: Vec<usize> = (0..n).filter(|i| !vars.contains(i)).collect();
        let q_ss = self.q.select_rows(vars).select_columns(vars);
        let q_se = self.q.select_rows(vars).select_columns(&keep);
        let q_ee = self.q.select_rows(&keep).select_columns(&keep);
        let j_s = self.lin.select_rows(vars);
        let j_e = self.lin.select_rows(&keep);

        let ln_det = ln_inv_sqrt_det(&q_ss)?;
        let lu = q_ss.lu();
        let qinv_qse = lu
            .solve(&q_se)
            .ok_or_else(|| Error::NonConvergentGaussian("singular block".into()))?;
        let qinv_js = lu
            .solve(&j_s)
            .ok_or_else(|| Error::NonConvergentGaussian("singular block".into()))?;

        let q_new = symmetrize(&(q_ee - q_se.transpose() * &qinv_qse));
        let lin_new = j_e - q_se.transpose() * &qinv_js;
        let log_scale =
            self.log_scale + 0.5 * vars.len() as f64 * ln_two_pi() + ln_det + 0.5 * j_s.dot(&qinv_js);
        Ok(GaussianForm { q: q_new, lin: lin_new, log_scale })
    }

    /// Pull back through the linear substitution `w = T v` (no Jacobian factor).
    pub fn substitute(&self, t: &DMatrix<f64>) -> GaussianForm {
        let tc = t.map(|x| Complex64::new(x, 0.0));
        GaussianForm {
            q: symmetrize(&(tc.transpose() * &self.q * &tc)),
            lin: tc.transpose() * &self.lin,
            log_scale: self.log_scale,
        }
    }
}

/// Standard symplectic form `J = [[0, I], [-I, 0]]` on `2n` coordinates.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// First and second moments of a Gaussian state of `N + 1` oscillators.
///
/// `cov` is the symmetrized covariance `<{dx_i, dx_j}>/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if !mean.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: mean.len() + 1, got: mean.len() });
        }
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: cov.nrows() });
        }
        Ok(Self { mean, cov })
    }

    /// Number of oscillators `N + 1`.
    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Smallest eigenvalue of `cov + (i hbar / 2) J`; non-negative for physical states.
    pub fn uncertainty_min_eigenvalue(&self, hbar: f64) -> f64 {
        let n = self.mean.len();
        let a = &self.cov;
        let b = symplectic_form(self.modes()) * (hbar / 2.0);
        // Hermitian A + iB has the spectrum of [[A, -B], [B, A]] (each eigenvalue twice).
        let mut real = DMatrix::zeros(2 * n, 2 * n);
        real.view_mut((0, 0), (n, n)).copy_from(a);
        real.view_mut((n, n), (n, n)).copy_from(a);
        real.view_mut((0, n), (n, n)).copy_from(&(-&b));
        real.view_mut((n, 0), (n, n)).copy_from(&b);
        real.symmetric_eigenvalues().min()
    }

    pub fn check_physical(&self, hbar: f64) -> Result<()> {
        let asym = (&self.cov - self.cov.transpose()).amax();
        if asym > 1e-12 * self.cov.amax().max(1.0) {
            return Err(Error::NonPhysicalState(format!("covariance asymmetric by {asym:e}")));
        }
        let m = self.uncertainty_min_eigenvalue(hbar);
        if m < -1e-10 {
            return Err(Error::NonPhysicalState(format!(
                "cov + i hbar J / 2 has eigenvalue {m:e}"
            )));
        }
        Ok(())
    }
}

/// Product state: `main` on the main oscillator, each bath mode thermal at `beta`
/// with `<y_k^2> = hbar/(2 w_k) coth(beta hbar w_k / 2)` and
/// `<p_k^2> = (hbar w_k / 2) coth(beta hbar w_k / 2)`.
pub fn thermal_bath_state(model: &Model, beta: f64, main: &ReducedGaussian) -> Result<GaussianState> {
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let n = model.dim();
    let hbar = model.hbar();
    let mut mean = DVector::zeros(2 * n);
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    mean[0] = main.mean_y;
    mean[n] = main.mean_p;
    cov[(0, 0)] = main.var_y;
    cov[(n, n)] = main.var_p;
    cov[(0, n)] = main.cov_yp;
    cov[(n, 0)] = main.cov_yp;
    for (k, mode) in model.baths().iter().enumerate() {
        let c = coth(beta * hbar * mode.omega / 2.0);
        cov[(k + 1, k + 1)] = hbar / (2.0 * mode.omega) * c;
        cov[(n + k + 1, n + k + 1)] = hbar * mode.omega / 2.0 * c;
    }
    GaussianState::new(mean, cov)
}

/// Phase-space flow `S = [[Fdot, F], [Fddot, Fdot]]` (`Fddot = -B F`).
pub fn symplectic_map(matfun: &MatFun) -> DMatrix<f64> {
    let n = matfun.f.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&matfun.fdot);
    s.view_mut((0, n), (n, n)).copy_from(&matfun.f);
    s.view_mut((n, 0), (n, n)).copy_from(&matfun.fddot);
    s.view_mut((n, n), (n, n)).copy_from(&matfun.fdot);
    s
}

/// `mean <- S mean - (R, Rdot)`, `cov <- S cov S^T`.
pub fn evolve_state(
    state: &GaussianState,
    matfun: &MatFun,
    drive: Option<&DriveDisplacements>,
) -> Result<GaussianState> {
    let n = matfun.f.nrows();
    if state.mean.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: state.mean.len() });
    }
    let s = symplectic_map(matfun);
    let mut mean = &s * &state.mean;
    if let Some(d) = drive {
        if d.r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: d.r.len() });
        }
        for i in 0..n {
            mean[i] -= d.r[i];
            mean[n + i] -= d.rdot[i];
        }
    }
    let cov = symmetrize(&(&s * &state.cov * s.transpose()));
    Ok(GaussianState { mean, cov })
}
