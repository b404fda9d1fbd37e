//! Closed-form propagator of the oscillator-bath system, undriven and driven.
//!
//! ```text
//! K(y, t; y', 0) = prod_alpha sqrt(z_alpha / (2 pi i hbar sin(z_alpha t)))
//!                  * exp{(i/2hbar)[y.M.y + y'.M.y' - 2 y'.F^{-1}.y]},   M = F^{-1} Fdot
//! ```
//!
//! With external forces `f_mu(t)` coupling as `+f_mu Y_mu` in the Hamiltonian,
//! the kernel picks up `exp{-(i/hbar)[y'.F^{-1}.R + y.F^{-1}.Rcheck]} exp(-i zeta)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, CVector};
use crate::matfun::{f_inverse, f_inverse_fdot, matfun_at, CAUSTIC_TOLERANCE};
use crate::model::Spectrum;
use crate::quadrature::{cumulative_simpson, simpson_weights};

/// Relative mismatch between a force profile's duration and the requested
/// time below which the native grid is used as is.
const DURATION_MATCH: f64 = 1e-12;

/// Prefactor `sqrt(z / (2 pi i hbar sin(z t)))` of one normal mode with the
/// Maslov branch: the phase is `-sgn(t) (pi/4 + (pi/2) floor(|z t| / pi))`.
pub fn mode_prefactor(z: f64, hbar: f64, t: f64) -> Complex64 {
    let s = (z * t).sin();
    let magnitude = (z / (2.0 * PI * hbar * s.abs())).sqrt();
    let crossings = ((z * t).abs() / PI).floor();
    let phase = -t.signum() * (PI / 4.0 + PI / 2.0 * crossings);
    Complex64::from_polar(magnitude, phase)
}

/// Gaussian-kernel parameterization of `K(y, t; y', 0)`:
///
/// `prefactor * exp{(i/2hbar)[y.myy.y + y'.mpp.y' - 2 y'.mcross.y] + linear_y.y + linear_yprime.y' + phase0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorForm {
    pub t: f64,
    pub hbar: f64,
    pub prefactor: Complex64,
    pub myy: DMatrix<f64>,
    pub mpp: DMatrix<f64>,
    /// `F^{-1}(t)`; enters the exponent as `-2 y'.mcross.y`.
    pub mcross: DMatrix<f64>,
    pub linear_y: CVector,
    pub linear_yprime: CVector,
    pub phase0: Complex64,
}

impl PropagatorForm {
    pub fn dim(&self) -> usize {
        self.myy.nrows()
    }

    pub fn is_driven(&self) -> bool {
        self.phase0 != Complex64::new(0.0, 0.0)
            || self.linear_y.iter().chain(self.linear_yprime.iter()).any(|c| c.norm() > 0.0)
    }

    /// Logarithm of the Gaussian factor (everything except the prefactor).
    pub fn log_gaussian(&self, y: &DVector<f64>, yprime: &DVector<f64>) -> Result<Complex64> {
        let n = self.dim();
        for v in [y, yprime] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let quad = y.dot(&(&self.myy * y)) + yprime.dot(&(&self.mpp * yprime))
            - 2.0 * yprime.dot(&(&self.mcross * y));
        let mut out = Complex64::new(0.0, quad / (2.0 * self.hbar)) + self.phase0;
        for i in 0..n {
            out += self.linear_y[i] * y[i] + self.linear_yprime[i] * yprime[i];
        }
        Ok(out)
    }
}

pub fn propagator_form(spectrum: &Spectrum, t: f64) -> Result<PropagatorForm> {
    let mf = matfun_at(spectrum, t);
    let finv = f_inverse(&mf, spectrum)?;
    let m = f_inverse_fdot(&mf, spectrum)?;
    let hbar = spectrum.hbar();
    let prefactor = spectrum
        .z()
        .iter()
        .map(|&z| mode_prefactor(z, hbar, t))
        .product();
    let n = spectrum.dim();
    Ok(PropagatorForm {
        t,
        hbar,
        prefactor,
        myy: m.clone(),
        mpp: m,
        mcross: finv,
        linear_y: CVector::zeros(n),
        linear_yprime: CVector::zeros(n),
        phase0: Complex64::new(0.0, 0.0),
    })
}

/// `K(y, t; y', 0)` from a precomputed form.
pub fn evaluate_k(form: &PropagatorForm, y: &DVector<f64>, yprime: &DVector<f64>) -> Result<Complex64> {
    Ok(form.prefactor * form.log_gaussian(y, yprime)?.exp())
}

/// Gaussian algebra of `int dy'' K(y, t; y'') K*(y', t; y'')`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointComposition {
    /// Net coefficient matrix of `y''.(...).y''` in the exponent; vanishes identically.
    pub intermediate_quadratic: CMatrix,
    /// Coefficient matrix of `y''.(...).y` in the exponent.
    pub coupling_y: CMatrix,
    /// Coefficient matrix of `y''.(...).y'` in the exponent.
    pub coupling_yprime: CMatrix,
    /// Weight of the resulting delta function,
    /// `|prefactor|^2 (2 pi hbar)^{N+1} / |det F^{-1}|`; equals 1 for a unitary kernel.
    pub delta_weight: f64,
}

impl AdjointComposition {
    /// Largest entry of `coupling_y + coupling_yprime`; zero when the exponent
    /// depends on `y - y'` only.
    pub fn coupling_mismatch(&self) -> f64 {
        (&self.coupling_y + &self.coupling_yprime).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Compose a form with its own adjoint over the intermediate coordinate.
///
/// The `y''` quadratic terms of `K` and `K*` cancel, leaving
/// `exp{-(i/hbar) y''.F^{-1}.(y - y')}`, whose `y''` integral is
/// `(2 pi hbar)^{N+1} |det F| delta(y - y')`.
pub fn adjoint_composition(form: &PropagatorForm) -> Result<AdjointComposition> {
    let i_over_hbar = Complex64::new(0.0, 1.0 / form.hbar);
    let to_c = |m: &DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
    // K(y, t; y''): (i/2hbar) y''.mpp.y'' - (i/hbar) y''.mcross.y
    // K*(y', t; y''): -(i/2hbar) y''.mpp.y'' + (i/hbar) y''.mcross.y'
    let intermediate_quadratic = to_c(&form.mpp) * (i_over_hbar * 0.5) - to_c(&form.mpp) * (i_over_hbar * 0.5);
    let coupling_y = to_c(&form.mcross) * (-i_over_hbar);
    let coupling_yprime = to_c(&form.mcross) * i_over_hbar;
    let n = form.dim() as i32;
    let det_finv = form.mcross.clone().lu().determinant().abs();
    let delta_weight = form.prefactor.norm_sqr() * (2.0 * PI * form.hbar).powi(n) / det_finv;
    Ok(AdjointComposition { intermediate_quadratic, coupling_y, coupling_yprime, delta_weight })
}

/// External forces `f_mu(s)` sampled on the uniform grid `s_j = j * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceProfile {
    step: f64,
    /// `samples[j][mu] = f_mu(s_j)`.
    samples: Vec<DVector<f64>>,
}

impl ForceProfile {
    pub fn from_samples(step: f64, samples: Vec<DVector<f64>>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("force step must be positive, got {step}")));
        }
        if samples.len() < 2 {
            return Err(Error::GridTooCoarse(format!(
                "force profile needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        let dim = samples[0].len();
        if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Ok(Self { step, samples })
    }

    /// Sample `f(s)` on `intervals + 1` nodes spanning `[0, t_end]`.
    pub fn from_fn(
        dim: usize,
        t_end: f64,
        intervals: usize,
        f: impl Fn(f64) -> DVector<f64>,
    ) -> Result<Self> {
        if intervals == 0 || !(t_end > 0.0) {
            return Err(Error::GridTooCoarse(format!(
                "cannot sample [0, {t_end}] with {intervals} intervals"
            )));
        }
        let step = t_end / intervals as f64;
        let samples: Vec<DVector<f64>> = (0..=intervals)
            .map(|j| {
                let v = f(j as f64 * step);
                debug_assert_eq!(v.len(), dim);
                v
            })
            .collect();
        Self::from_samples(step, samples)
    }

    /// Force acting on the main oscillator only.
    pub fn main_only(dim: usize, t_end: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(dim, t_end, intervals, |s| {
            let mut v = DVector::zeros(dim);
            v[0] = f(s);
            v
        })
    }

    pub fn zero(dim: usize, t_end: f64, intervals: usize) -> Result<Self> {
        Self::from_fn(dim, t_end, intervals, |_| DVector::zeros(dim))
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [DVector<f64>] {
        &mut self.samples
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.step * self.intervals() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.amax()).fold(0.0, f64::max)
    }

    /// Linear interpolation; zero outside the sampled range.
    pub fn value_at(&self, s: f64) -> DVector<f64> {
        let n = self.intervals();
        if s < 0.0 || s > self.duration() * (1.0 + DURATION_MATCH) {
            return DVector::zeros(self.dim());
        }
        let x = s / self.step;
        let j = (x.floor() as usize).min(n - 1);
        let frac = (x - j as f64).clamp(0.0, 1.0);
        &self.samples[j] * (1.0 - frac) + &self.samples[j + 1] * frac
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { step: self.step, samples: self.samples.iter().map(|s| s * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.samples.len() != other.samples.len() || self.step != other.step {
            return Err(Error::DimensionMismatch {
                expected: self.samples.len(),
                got: other.samples.len(),
            });
        }
        Ok(Self {
            step: self.step,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        })
    }

    /// Profile on `[0, t]`: the native grid when the durations agree, otherwise a
    /// linearly interpolated resampling with spacing no larger than `step` and
    /// an even number of intervals.
    pub fn on_interval(&self, t: f64) -> Result<ForceProfile> {
        if (self.duration() - t).abs() <= DURATION_MATCH * t.abs().max(self.step) {
            return Ok(self.clone());
        }
        let mut n = (t / self.step).ceil().max(2.0) as usize;
        if n % 2 == 1 {
            n += 1;
        }
        ForceProfile::from_fn(self.dim(), t, n, |s| self.value_at(s))
    }

    /// Simpson weights of the native grid.
    pub fn quadrature_weights(&self) -> Result<Vec<f64>> {
        simpson_weights(self.intervals(), self.step)
    }
}

/// Drive displacements at time `t`:
/// `R(t) = int_0^t F(t-s) f(s) ds`, `Rdot(t) = int_0^t Fdot(t-s) f(s) ds`,
/// `Rcheck(t) = int_0^t F(s) f(s) ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveDisplacements {
    pub r: DVector<f64>,
    pub rdot: DVector<f64>,
    pub rcheck: DVector<f64>,
}

/// Force projected on normal modes: `modal[j][alpha] = (X^T f(s_j))_alpha`.
fn modal_samples(spectrum: &Spectrum, force: &ForceProfile) -> Vec<DVector<f64>> {
    let xt = spectrum.x().transpose();
    force.samples().iter().map(|f| &xt * f).collect()
}

fn check_force_dim(spectrum: &Spectrum, force: &ForceProfile) -> Result<()> {
    if force.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: spectrum.dim(), got: force.dim() });
    }
    if force.samples().len() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "Simpson quadrature needs at least 3 force samples, got {}",
            force.samples().len()
        )));
    }
    Ok(())
}

pub fn drive_displacements(spectrum: &Spectrum, force: &ForceProfile, t: f64) -> Result<DriveDisplacements> {
    let force = force.on_interval(t)?;
    check_force_dim(spectrum, &force)?;
    let w = force.quadrature_weights()?;
    let modal = modal_samples(spectrum, &force);
    let z = spectrum.z();
    let n = spectrum.dim();
    let (mut r, mut rdot, mut rcheck) = (DVector::zeros(n), DVector::zeros(n), DVector::zeros(n));
    for (j, fj) in modal.iter().enumerate() {
        let s = j as f64 * force.step();
        for a in 0..n {
            let za = z[a];
            r[a] += w[j] * (za * (t - s)).sin() / za * fj[a];
            rdot[a] += w[j] * (za * (t - s)).cos() * fj[a];
            rcheck[a] += w[j] * (za * s).sin() / za * fj[a];
        }
    }
    let x = spectrum.x();
    Ok(DriveDisplacements { r: x * r, rdot: x * rdot, rcheck: x * rcheck })
}

/// Phase `zeta(t) = (1/hbar) int_0^t ds int_0^s du f(s).Kern(s, u).f(u)` with
/// `Kern(s, u) = sin(sqrt(B) u) sin(sqrt(B)(t-s)) / (sqrt(B) sin(sqrt(B) t))`.
///
/// Evaluated mode by mode; the inner integral is a running Simpson sum on the
/// force grid, the outer one uses the grid's Simpson weights.
pub fn zeta(spectrum: &Spectrum, force: &ForceProfile, t: f64) -> Result<f64> {
    let force = force.on_interval(t)?;
    check_force_dim(spectrum, &force)?;
    let z = spectrum.z();
    for (a, &za) in z.iter().enumerate() {
        let s = (za * t).sin();
        if s.abs() < CAUSTIC_TOLERANCE {
            return Err(Error::Caustic { t, mode: a, sin_abs: s.abs() });
        }
    }
    let h = force.step();
    let w = force.quadrature_weights()?;
    let modal = modal_samples(spectrum, &force);
    let mut total = 0.0;
    for (a, &za) in z.iter().enumerate() {
        let inner_integrand: Vec<f64> = modal
            .iter()
            .enumerate()
            .map(|(j, f)| (za * j as f64 * h).sin() * f[a])
            .collect();
        let inner = cumulative_simpson(&inner_integrand, h);
        let outer: f64 = modal
            .iter()
            .enumerate()
            .map(|(j, f)| w[j] * f[a] * (za * (t - j as f64 * h)).sin() * inner[j])
            .sum();
        total += outer / (za * (za * t).sin());
    }
    Ok(total / spectrum.hbar())
}

/// Propagator form including the drive: linear terms `-(i/hbar) F^{-1}.Rcheck`
/// on `y`, `-(i/hbar) F^{-1}.R` on `y'`, and constant phase `-i zeta`.
pub fn forced_form(spectrum: &Spectrum, force: &ForceProfile, t: f64) -> Result<PropagatorForm> {
    let mut form = propagator_form(spectrum, t)?;
    let d = drive_displacements(spectrum, force, t)?;
    let zeta = zeta(spectrum, force, t)?;
    let minus_i_over_hbar = Complex64::new(0.0, -1.0 / form.hbar);
    let finv_r = &form.mcross * &d.r;
    let finv_rcheck = &form.mcross * &d.rcheck;
    form.linear_y = finv_rcheck.map(|x| minus_i_over_hbar * x);
    form.linear_yprime = finv_r.map(|x| minus_i_over_hbar * x);
    form.phase0 = Complex64::new(0.0, -zeta);
    Ok(form)
}

pub fn evaluate_k_forced(
    spectrum: &Spectrum,
    force: &ForceProfile,
    t: f64,
    y: &DVector<f64>,
    yprime: &DVector<f64>,
) -> Result<Complex64> {
    evaluate_k(&forced_form(spectrum, force, t)?, y, yprime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn mehler(w: f64, hbar: f64, t: f64, y: f64, yp: f64) -> Complex64 {
        let s = (w * t).sin();
        let pref = mode_prefactor(w, hbar, t);
        let arg = w / (2.0 * hbar * s) * ((y * y + yp * yp) * (w * t).cos() - 2.0 * y * yp);
        pref * Complex64::new(0.0, arg).exp()
    }

    #[test]
    fn maslov_branch_phases() {
        let p = mode_prefactor(1.0, 1.0, 0.5);
        assert!((p.arg() + PI / 4.0).abs() < 1e-15);
        let p = mode_prefactor(1.0, 1.0, 4.0);
        assert!((p.arg() + 3.0 * PI / 4.0).abs() < 1e-15);
        let q = mode_prefactor(1.0, 1.0, -0.5);
        assert!((q - mode_prefactor(1.0, 1.0, 0.5).conj()).norm() < 1e-15);
    }

    #[test]
    fn decoupled_form_is_mehler_product() {
        let m = Model::from_pairs(1.1, &[(2.0, 0.0), (0.6, 0.0)]).unwrap();
        let s = m.spectrum().unwrap();
        let t = 0.9;
        let form = propagator_form(&s, t).unwrap();
        let y = v(&[0.3, -0.1, 0.7]);
        let yp = v(&[-0.2, 0.4, 0.05]);
        let k = evaluate_k(&form, &y, &yp).unwrap();
        let expect: Complex64 = [1.1, 2.0, 0.6]
            .iter()
            .enumerate()
            .map(|(i, &w)| mehler(w, 1.0, t, y[i], yp[i]))
            .product();
        assert!((k - expect).norm() < 1e-12 * expect.norm());
        assert!(!form.is_driven());
    }

    #[test]
    fn prefactor_modulus() {
        let m = Model::from_pairs(1.5, &[(1.0, 0.4), (2.2, 0.3)]).unwrap();
        let s = m.spectrum().unwrap();
        let form = propagator_form(&s, 1.7).unwrap();
        let det_f = matfun_at(&s, 1.7).det_f;
        let expect = (2.0 * PI).powi(-3) / det_f.abs();
        assert!((form.prefactor.norm_sqr() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn dimension_mismatch() {
        let s = Model::single(1.0).unwrap().spectrum().unwrap();
        let form = propagator_form(&s, 0.5).unwrap();
        assert!(matches!(
            evaluate_k(&form, &v(&[0.0, 1.0]), &v(&[0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conjugation_reversal_symmetry() {
        let m = Model::from_pairs(1.5, &[(1.0, 0.4), (2.2, 0.3)]).unwrap();
        let s = m.spectrum().unwrap();
        let y = v(&[0.3, -0.4, 0.2]);
        let yp = v(&[-0.1, 0.25, 0.6]);
        for t in [0.4, 2.9] {
            let fwd = evaluate_k(&propagator_form(&s, t).unwrap(), &y, &yp).unwrap();
            let back = evaluate_k(&propagator_form(&s, -t).unwrap(), &yp, &y).unwrap();
            assert!((fwd - back.conj()).norm() < 1e-12 * fwd.norm());
        }
    }

    #[test]
    fn adjoint_composition_is_delta() {
        let m = Model::from_pairs(1.5, &[(1.0, 0.4)]).unwrap();
        let s = m.spectrum().unwrap();
        let c = adjoint_composition(&propagator_form(&s, 2.3).unwrap()).unwrap();
        assert!(c.intermediate_quadratic.iter().all(|x| x.norm() <= 1e-10));
        assert!(c.coupling_mismatch() <= 1e-10);
        assert!((c.delta_weight - 1.0).abs() < 1e-10);
    }

    #[test]
    fn force_profile_validation_and_interpolation() {
        assert!(matches!(
            ForceProfile::from_samples(0.1, vec![v(&[1.0])]),
            Err(Error::GridTooCoarse(_))
        ));
        let f = ForceProfile::main_only(2, 1.0, 4, |s| s).unwrap();
        assert!((f.value_at(0.3)[0] - 0.3).abs() < 1e-15);
        assert_eq!(f.value_at(0.3)[1], 0.0);
        let two = ForceProfile::main_only(1, 1.0, 1, |s| s).unwrap();
        let s = Model::single(1.0).unwrap().spectrum().unwrap();
        // two samples resample onto an even grid on demand
        assert!(drive_displacements(&s, &two, 1.0).is_err());
        assert!(drive_displacements(&s, &two, 0.99).is_ok());
    }

    #[test]
    fn zero_force_gives_zero_drive() {
        let m = Model::from_pairs(1.5, &[(1.0, 0.4)]).unwrap();
        let s = m.spectrum().unwrap();
        let f = ForceProfile::zero(2, 1.2, 40).unwrap();
        let d = drive_displacements(&s, &f, 1.2).unwrap();
        assert_eq!(d.r.amax() + d.rcheck.amax() + d.rdot.amax(), 0.0);
        assert_eq!(zeta(&s, &f, 1.2).unwrap(), 0.0);
        let y = v(&[0.2, -0.3]);
        let yp = v(&[0.5, 0.1]);
        let k = evaluate_k(&propagator_form(&s, 1.2).unwrap(), &y, &yp).unwrap();
        let kf = evaluate_k_forced(&s, &f, 1.2, &y, &yp).unwrap();
        assert_eq!(k, kf);
    }

    #[test]
    fn constant_force_displacement() {
        let (w, f0, t) = (1.3, 0.7, 2.1);
        let s = Model::single(w).unwrap().spectrum().unwrap();
        let f = ForceProfile::main_only(1, t, 400, |_| f0).unwrap();
        let d = drive_displacements(&s, &f, t).unwrap();
        let expect = f0 * (1.0 - (w * t).cos()) / (w * w);
        assert!((d.r[0] - expect).abs() < 1e-10);
        // Rcheck for constant force has the same closed form
        assert!((d.rcheck[0] - expect).abs() < 1e-10);
        assert!((d.rdot[0] - f0 * (w * t).sin() / w).abs() < 1e-10);
    }

    #[test]
    fn displacement_linearity_and_zeta_scaling() {
        let m = Model::from_pairs(1.5, &[(1.0, 0.4), (2.2, -0.3)]).unwrap();
        let s = m.spectrum().unwrap();
        let t = 1.4;
        let f1 = ForceProfile::main_only(3, t, 60, |x| (2.0 * x).sin()).unwrap();
        let f2 = ForceProfile::from_fn(3, t, 60, |x| v(&[0.2, x, -x * x])).unwrap();
        let sum = f1.add(&f2).unwrap();
        let (d1, d2, ds) = (
            drive_displacements(&s, &f1, t).unwrap(),
            drive_displacements(&s, &f2, t).unwrap(),
            drive_displacements(&s, &sum, t).unwrap(),
        );
        assert!((&d1.r + &d2.r - &ds.r).amax() < 1e-12);
        assert!((&d1.rcheck + &d2.rcheck - &ds.rcheck).amax() < 1e-12);
        let z1 = zeta(&s, &f1, t).unwrap();
        let z3 = zeta(&s, &f1.scaled(3.0), t).unwrap();
        assert!((z3 - 9.0 * z1).abs() < 1e-12 * z3.abs());
    }

    #[test]
    fn zeta_self_convergence() {
        let s = Model::single(1.0).unwrap().spectrum().unwrap();
        let coarse = ForceProfile::main_only(1, 1.0, 100, |_| 1.0).unwrap();
        let fine = ForceProfile::main_only(1, 1.0, 1000, |_| 1.0).unwrap();
        let zc = zeta(&s, &coarse, 1.0).unwrap();
        let zf = zeta(&s, &fine, 1.0).unwrap();
        assert!(((zc - zf) / zf).abs() < 1e-6, "{zc} {zf}");
    }

    #[test]
    fn caustic_propagates() {
        let s = Model::single(1.0).unwrap().spectrum().unwrap();
        assert!(matches!(propagator_form(&s, PI), Err(Error::Caustic { .. })));
        let f = ForceProfile::main_only(1, PI, 20, |_| 1.0).unwrap();
        assert!(matches!(zeta(&s, &f, PI), Err(Error::Caustic { .. })));
    }
}
