//! Thermal equilibrium from imaginary-time matrix functions.
//!
//! At `t = -i hbar beta` every block of `F^{-1} Fdot` and `F^{-1}` is `i` times
//! a real hyperbolic analog (see [`HyperbolicBlocks`]). All quantities below
//! are written in those analogs; a subscript `h` marks them. The `i` factors
//! cancel in each observable:
//!
//! ```text
//! eta   = i eta_h,  eta_h = (B_h - C_h).(A_h - D_h)^{-1}.(B_h - C_h)
//! <y0^2> = i hbar / (2(a - b - eta)) = hbar / (2(a_h - b_h - eta_h))
//! <p0^2> = -i hbar (a + b) / 2       = hbar (a_h + b_h) / 2
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, GaussianState};
use crate::matfun::{coth, imaginary_time_blocks, ln_sinh, HyperbolicBlocks};
use crate::model::Spectrum;
use crate::reduced::{rho_red_grid, ReducedGaussian};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive and finite, got {beta}")));
    }
    Ok(())
}

/// `ln Z = -sum_alpha ln(2 sinh(beta hbar z_alpha / 2))`.
pub fn partition_function(spectrum: &Spectrum, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let hb = spectrum.hbar() * beta;
    Ok(-spectrum
        .z()
        .iter()
        .map(|&z| std::f64::consts::LN_2 + ln_sinh(0.5 * z * hb))
        .sum::<f64>())
}

/// `ln Z` from `Z = 2^{-(N+1)/2} det(Fdot(-i hbar beta) - I)^{-1/2}`, with the
/// determinant taken by LU of the assembled matrix.
///
/// Overflows once `beta hbar z_max` exceeds roughly 700; use
/// [`partition_function`] there.
pub fn partition_function_from_determinant(spectrum: &Spectrum, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let hyp = imaginary_time_blocks(spectrum, beta)?;
    let n = spectrum.dim();
    let det = (hyp.fdoth - DMatrix::identity(n, n)).lu().determinant();
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::SingularBlock(format!("det(Fdot - I) = {det:e} at beta = {beta}")));
    }
    Ok(-0.5 * n as f64 * std::f64::consts::LN_2 - 0.5 * det.ln())
}

fn eta_from_blocks(hyp: &HyperbolicBlocks) -> Result<f64> {
    let bl = &hyp.blocks;
    if bl.n_bath() == 0 {
        return Ok(0.0);
    }
    let diff: DVector<f64> = &bl.bvec - &bl.cvec;
    let amd = &bl.a_mat - &bl.d_mat;
    let chol = amd.clone().cholesky().ok_or_else(|| {
        Error::SingularBlock(format!("A - D not positive definite at beta = {}", hyp.beta))
    })?;
    Ok(diff.dot(&chol.solve(&diff)))
}

/// Real analog `eta_h` of `eta`; zero without a bath.
pub fn eta(spectrum: &Spectrum, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    eta_from_blocks(&imaginary_time_blocks(spectrum, beta)?)
}

/// `(<y0^2>, <p0^2>)` in thermal equilibrium.
pub fn equilibrium_moments(spectrum: &Spectrum, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let hyp = imaginary_time_blocks(spectrum, beta)?;
    let eta_h = eta_from_blocks(&hyp)?;
    let (a, b) = (hyp.blocks.a, hyp.blocks.b);
    let hbar = spectrum.hbar();
    Ok((hbar / (2.0 * (a - b - eta_h)), hbar * (a + b) / 2.0))
}

/// Both sides of `det[F^{-1}(Fdot - I)] = det(A - D) (a - b - eta)` in real
/// analogs; returns `(lhs, rhs)`.
pub fn block_determinant_identity(spectrum: &Spectrum, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let hyp = imaginary_time_blocks(spectrum, beta)?;
    let lhs = hyp.finv_fdot_minus_identity().lu().determinant();
    let bl = &hyp.blocks;
    let det_amd = if bl.n_bath() == 0 { 1.0 } else { (&bl.a_mat - &bl.d_mat).lu().determinant() };
    let rhs = det_amd * (bl.a - bl.b - eta_from_blocks(&hyp)?);
    Ok((lhs, rhs))
}

/// Equilibrium reduced density matrix on a position grid.
pub fn equilibrium_rho(spectrum: &Spectrum, beta: f64, grid: &[f64]) -> Result<CMatrix> {
    let (y2, p2) = equilibrium_moments(spectrum, beta)?;
    let red = ReducedGaussian { mean_y: 0.0, mean_p: 0.0, var_y: y2, var_p: p2, cov_yp: 0.0 };
    rho_red_grid(&red, grid, spectrum.hbar())
}

/// Gibbs state of the full system, built mode by mode.
pub fn gibbs_state(spectrum: &Spectrum, beta: f64) -> Result<GaussianState> {
    check_beta(beta)?;
    let hbar = spectrum.hbar();
    let n = spectrum.dim();
    let half = |z: f64| coth(0.5 * beta * hbar * z);
    let pos = spectrum.mode_function(|z| hbar / (2.0 * z) * half(z));
    let mom = spectrum.mode_function(|z| hbar * z / 2.0 * half(z));
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    cov.view_mut((0, 0), (n, n)).copy_from(&pos);
    cov.view_mut((n, n), (n, n)).copy_from(&mom);
    GaussianState::new(DVector::zeros(2 * n), cov)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalReport {
    pub beta: f64,
    pub log_z: f64,
    pub eta: f64,
    pub mean_sq_y: f64,
    pub mean_sq_p: f64,
    /// `Tr rho^2 = hbar / (2 sqrt(<y0^2> <p0^2>))`.
    pub purity: f64,
}

pub fn thermal_report(spectrum: &Spectrum, beta: f64) -> Result<ThermalReport> {
    let (y2, p2) = equilibrium_moments(spectrum, beta)?;
    Ok(ThermalReport {
        beta,
        log_z: partition_function(spectrum, beta)?,
        eta: eta(spectrum, beta)?,
        mean_sq_y: y2,
        mean_sq_p: p2,
        purity: spectrum.hbar() / (2.0 * (y2 * p2).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::evolve_state;
    use crate::matfun::matfun_at;
    use crate::model::Model;
    use crate::reduced::reduce_to_main;

    fn model3() -> Model {
        Model::from_pairs(2.0, &[(1.0, 0.6), (3.0, 1.1), (1.7, -0.4)]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn single_oscillator_partition_function() {
        let s = Model::single(1.0).unwrap().spectrum().unwrap();
        let lz = partition_function(&s, 1.0).unwrap();
        let series: f64 = (0..200).map(|n| (-(n as f64 + 0.5)).exp()).sum();
        assert!(rel(lz.exp(), series) < 1e-12);
        assert!((lz + (2.0 * 0.5f64.sinh()).ln()).abs() < 1e-15);
    }

    #[test]
    fn determinant_route_and_ground_state_limit() {
        let s = Model::from_pairs(1.5, &[(1.0, 0.4), (2.2, 0.3)]).unwrap().spectrum().unwrap();
        let a = partition_function(&s, 0.7).unwrap();
        let b = partition_function_from_determinant(&s, 0.7).unwrap();
        assert!(rel(a.exp(), b.exp()) < 1e-10);
        let beta = 200.0;
        let zero_point: f64 = s.z().iter().map(|z| z / 2.0).sum();
        assert!((partition_function(&s, beta).unwrap() + beta * zero_point).abs() < 1e-12);
        assert!(partition_function(&s, 1e5).unwrap().is_finite());
    }

    #[test]
    fn eta_vanishes_without_coupling_and_is_relabeling_invariant() {
        let s = Model::from_pairs(1.0, &[(2.0, 0.0), (0.5, 0.0)]).unwrap().spectrum().unwrap();
        assert_eq!(eta(&s, 1.0).unwrap(), 0.0);
        assert_eq!(eta(&Model::single(1.0).unwrap().spectrum().unwrap(), 1.0).unwrap(), 0.0);
        let p = Model::from_pairs(2.0, &[(1.0, 0.6), (3.0, 1.1), (1.7, -0.4)]).unwrap();
        let q = Model::from_pairs(2.0, &[(1.7, -0.4), (1.0, 0.6), (3.0, 1.1)]).unwrap();
        let (ep, eq) = (eta(&p.spectrum().unwrap(), 1.3).unwrap(), eta(&q.spectrum().unwrap(), 1.3).unwrap());
        assert!((ep - eq).abs() < 1e-12 * ep.abs().max(1.0));
    }

    #[test]
    fn block_determinant() {
        let s = model3().spectrum().unwrap();
        for beta in [0.3, 1.0, 4.0] {
            let (l, r) = block_determinant_identity(&s, beta).unwrap();
            assert!(rel(r, l) < 1e-9, "{l} {r}");
        }
    }

    #[test]
    fn decoupled_moments() {
        let s = Model::from_pairs(1.3, &[(2.0, 0.0)]).unwrap().spectrum().unwrap();
        let (y2, p2) = equilibrium_moments(&s, 0.8).unwrap();
        let c = 1.0 / (0.5 * 0.8 * 1.3f64).tanh();
        assert!(rel(y2, c / 2.6) < 1e-12);
        assert!(rel(p2, 0.65 * c) < 1e-12);
    }

    #[test]
    fn normal_mode_sums() {
        let s = model3().spectrum().unwrap();
        let beta = 1.5;
        let (y2, p2) = equilibrium_moments(&s, beta).unwrap();
        let x = s.x();
        let (mut ey, mut ep) = (0.0, 0.0);
        for (a, &z) in s.z().iter().enumerate() {
            let c = 1.0 / (0.5 * beta * z).tanh();
            ey += x[(0, a)].powi(2) * c / (2.0 * z);
            ep += x[(0, a)].powi(2) * c * z / 2.0;
        }
        assert!(rel(y2, ey) < 1e-9 && rel(p2, ep) < 1e-9);
    }

    #[test]
    fn classical_limit() {
        let s = model3().spectrum().unwrap();
        let zmax = s.z().max();
        let beta = 0.01 / zmax;
        let (y2, _) = equilibrium_moments(&s, beta).unwrap();
        let binv = s.b().clone().try_inverse().unwrap();
        assert!(rel(y2 * beta, binv[(0, 0)]) < 1e-3);
    }

    #[test]
    fn gibbs_state_is_stationary_fixed_point() {
        let m = model3();
        let s = m.spectrum().unwrap();
        let beta = 1.5;
        let g = gibbs_state(&s, beta).unwrap();
        g.check_physical(1.0).unwrap();
        for t in [0.3, 2.0, 7.5] {
            let ev = evolve_state(&g, &matfun_at(&s, t), None).unwrap();
            assert!((&ev.cov - &g.cov).amax() < 1e-9 * g.cov.amax());
        }
        let red = reduce_to_main(&g);
        let (y2, p2) = equilibrium_moments(&s, beta).unwrap();
        assert!(rel(red.var_y, y2) < 1e-9 && rel(red.var_p, p2) < 1e-9);
    }

    #[test]
    fn temperature_monotonicity_and_dlogz() {
        let s = model3().spectrum().unwrap();
        let betas = [5.0, 2.0, 1.0, 0.5, 0.2, 0.1];
        let ys: Vec<f64> = betas.iter().map(|&b| equilibrium_moments(&s, b).unwrap().0).collect();
        assert!(ys.windows(2).all(|w| w[1] > w[0]));
        let (b, h) = (0.9, 1e-5);
        let d = (partition_function(&s, b + h).unwrap() - partition_function(&s, b - h).unwrap()) / (2.0 * h);
        let energy: f64 = s.z().iter().map(|z| z / 2.0 / (0.5 * b * z).tanh()).sum();
        assert!((d + energy).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_rho_matches_closed_exponent() {
        let s = model3().spectrum().unwrap();
        let beta = 0.9;
        let (y2, p2) = equilibrium_moments(&s, beta).unwrap();
        let sigma = y2.sqrt();
        let n = 400;
        let grid: Vec<f64> = (0..n).map(|i| -8.0 * sigma + 16.0 * sigma * i as f64 / (n - 1) as f64).collect();
        let h = grid[1] - grid[0];
        let rho = equilibrium_rho(&s, beta, &grid).unwrap();

        let hyp = imaginary_time_blocks(&s, beta).unwrap();
        let e = eta(&s, beta).unwrap();
        let (a, b) = (hyp.blocks.a, hyp.blocks.b);
        let pref = ((a - b - e) / std::f64::consts::PI).sqrt();
        let mut err: f64 = 0.0;
        for (i, &y) in grid.iter().enumerate() {
            for (j, &yp) in grid.iter().enumerate() {
                let v = pref * (-0.5 * ((y * y + yp * yp) * (a - e / 2.0) - 2.0 * y * yp * (b + e / 2.0))).exp();
                err = err.max((rho[(i, j)].re - v).abs()).max(rho[(i, j)].im.abs());
            }
        }
        assert!(err < 1e-8, "{err}");
        let tr: f64 = (0..n).map(|i| rho[(i, i)].re).sum::<f64>() * h;
        assert!((tr - 1.0).abs() < 1e-6);
        let purity: f64 = rho.iter().map(|c| c.norm_sqr()).sum::<f64>() * h * h;
        assert!(rel(purity, 1.0 / (2.0 * (y2 * p2).sqrt())) < 1e-4);
    }

    #[test]
    fn report_is_physical() {
        let s = model3().spectrum().unwrap();
        let r = thermal_report(&s, 2.0).unwrap();
        assert!(r.mean_sq_y * r.mean_sq_p >= 0.25);
        assert!(r.purity <= 1.0 && r.purity > 0.0);
        assert!(eta(&s, -1.0).is_err());
    }
}
