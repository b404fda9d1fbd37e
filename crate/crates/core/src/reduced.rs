//! Reduced dynamics of the main oscillator.
//!
//! The reduced kernel propagates the main oscillator's density matrix with
//! the bath traced out, starting from a product of an arbitrary main state
//! and a thermal bath:
//!
//! ```text
//! rho(y0, y0', t) = int dy01 dy02 J(y0, y0'; y01, y02) rho(y01, y02, 0)
//! J = (b3 / 2 pi) exp{i[b1 X xi + b2 X0 xi - b3 X xi0 - b4 X0 xi0] - a11 xi^2 - a12 xi xi0 - a22 xi0^2}
//! ```
//!
//! with `X = (y0 + y0')/2`, `xi = y0 - y0'` and likewise `X0`, `xi0` for the
//! initial pair.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, GaussianForm, GaussianState};
use crate::matfun::{coth, csch, f_inverse, f_inverse_fdot, ln_sinh, matfun_at};
use crate::model::Spectrum;
use crate::quadrature::simpson_weights;

/// Minimum number of grid points accepted by the grid-based kernel evolution.
pub const MIN_GRID_POINTS: usize = 200;

/// Relative spacing mismatch tolerated when checking that a grid is uniform.
const UNIFORM_GRID_TOLERANCE: f64 = 1e-9;

/// Single-mode Gaussian: means and symmetrized second moments of `(y, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedGaussian {
    pub mean_y: f64,
    pub mean_p: f64,
    pub var_y: f64,
    pub var_p: f64,
    pub cov_yp: f64,
}

impl ReducedGaussian {
    /// Ground state of an oscillator of frequency `omega`.
    pub fn vacuum(omega: f64, hbar: f64) -> Self {
        Self::coherent(omega, hbar, 0.0, 0.0)
    }

    /// Displaced ground state.
    pub fn coherent(omega: f64, hbar: f64, mean_y: f64, mean_p: f64) -> Self {
        Self { mean_y, mean_p, var_y: hbar / (2.0 * omega), var_p: hbar * omega / 2.0, cov_yp: 0.0 }
    }

    pub fn det(&self) -> f64 {
        self.var_y * self.var_p - self.cov_yp * self.cov_yp
    }

    /// `Tr rho^2 = hbar / (2 sqrt(det))`.
    pub fn purity(&self, hbar: f64) -> f64 {
        hbar / (2.0 * self.det().sqrt())
    }

    pub fn check(&self, hbar: f64) -> Result<()> {
        if !(self.var_y > 0.0 && self.var_p > 0.0) {
            return Err(Error::NonPhysicalState(format!(
                "variances must be positive (var_y = {}, var_p = {})",
                self.var_y, self.var_p
            )));
        }
        let det = self.det();
        if det < hbar * hbar / 4.0 - 1e-10 {
            return Err(Error::NonPhysicalState(format!(
                "var_y var_p - cov_yp^2 = {det:e} below hbar^2/4 = {:e}",
                hbar * hbar / 4.0
            )));
        }
        Ok(())
    }

    /// Largest absolute difference over the five parameters.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.mean_y - other.mean_y,
            self.mean_p - other.mean_p,
            self.var_y - other.var_y,
            self.var_p - other.var_p,
            self.cov_yp - other.cov_yp,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Marginal of the main oscillator (index 0 in each half of phase space).
pub fn reduce_to_main(state: &GaussianState) -> ReducedGaussian {
    let n = state.modes();
    ReducedGaussian {
        mean_y: state.mean[0],
        mean_p: state.mean[n],
        var_y: state.cov[(0, 0)],
        var_p: state.cov[(n, n)],
        cov_yp: state.cov[(0, n)],
    }
}

/// Exponent of `rho(y, y')` for a single-mode Gaussian, without the normalization.
///
/// With `X = (y + y')/2`, `xi = y - y'`, the momentum conditioned on `X` has
/// mean `mean_p + (cov_yp/var_y)(X - mean_y)` and variance
/// `var_p - cov_yp^2/var_y`, so
/// `rho = (2 pi var_y)^{-1/2} exp{-(X - m)^2/(2 var_y) + i xi pbar(X)/hbar - xi^2 sigma_p^2/(2 hbar^2)}`.
fn ln_rho_entry(red: &ReducedGaussian, hbar: f64, y: f64, yp: f64) -> Complex64 {
    let v = red.var_y;
    let xi = y - yp;
    let s = y + yp;
    let centred = 0.5 * s - red.mean_y;
    let sigma_p2 = red.var_p - red.cov_yp * red.cov_yp / v;
    let re = -sigma_p2 * xi * xi / (2.0 * hbar * hbar) - (s - 2.0 * red.mean_y).powi(2) / (8.0 * v);
    let im = xi * (red.mean_p + red.cov_yp / v * centred) / hbar;
    Complex64::new(re, im)
}

/// Position representation `rho(grid[i], grid[j])`.
pub fn rho_red_grid(red: &ReducedGaussian, grid: &[f64], hbar: f64) -> Result<CMatrix> {
    red.check(hbar)?;
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let n = grid.len();
    let norm = (2.0 * PI * red.var_y).sqrt().recip();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        norm * ln_rho_entry(red, hbar, grid[i], grid[j]).exp()
    }))
}

/// Coefficients of the reduced kernel at `(t, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedKernel {
    pub t: f64,
    pub beta: f64,
    pub hbar: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// Prefactor of `J` obtained from the Gaussian integrals; equals `|b3|/(2 pi)`.
    pub normalization: f64,
    /// Largest entry of the extracted form that must vanish: the `X X`,
    /// `X0 X0`, `X X0` couplings, imaginary parts of the `a` coefficients and
    /// real parts of the `b` coefficients.
    pub residual: f64,
}

/// Index layout of the variables used to build `J`.
struct JLayout {
    n_bath: usize,
}

impl JLayout {
    const Y0: usize = 0;
    const Y0P: usize = 1;
    const Y01: usize = 2;
    const Y02: usize = 3;

    fn bar1(&self, k: usize) -> usize {
        4 + k
    }
    fn bar2(&self, k: usize) -> usize {
        4 + self.n_bath + k
    }
    fn bar(&self, k: usize) -> usize {
        4 + 2 * self.n_bath + k
    }
    fn dim(&self) -> usize {
        4 + 3 * self.n_bath
    }
}

/// Add `sign * (i/2hbar)[yf.M.yf + yi.M.yi - 2 yi.Finv.yf]` over index maps of
/// the final and initial full coordinates.
fn add_kernel_exponent(
    form: &mut GaussianForm,
    m: &DMatrix<f64>,
    finv: &DMatrix<f64>,
    fin: &[usize],
    ini: &[usize],
    coefficient: Complex64,
) {
    let n = fin.len();
    for mu in 0..n {
        for nu in 0..n {
            form.add_bilinear(fin[mu], fin[nu], coefficient * m[(mu, nu)]);
            form.add_bilinear(ini[mu], ini[nu], coefficient * m[(mu, nu)]);
            form.add_bilinear(ini[mu], fin[nu], -2.0 * coefficient * finv[(mu, nu)]);
        }
    }
}

/// Substitution `(y0, y0', y01, y02) = T (X, xi, X0, xi0)`.
fn sum_difference_map() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.5, 0.0, 0.0, //
            1.0, -0.5, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.5, //
            0.0, 0.0, 1.0, -0.5,
        ],
    )
}

/// Reduced kernel coefficients at time `t` for a bath initially thermal at `beta`.
///
/// The joint kernel `K(y0, ybar; y01, ybar1) K*(y0', ybar; y02, ybar2) rho_B(ybar1, ybar2)`
/// is a Gaussian form over `(y0, y0', y01, y02, ybar1, ybar2, ybar)`. The bath
/// coordinates are integrated in closed form in the order `ybar1`, `ybar2`,
/// `ybar`; the remaining form is rewritten in sum/difference coordinates and
/// the coefficients read off.
pub fn kernel_j_coeffs(spectrum: &Spectrum, beta: f64, t: f64) -> Result<ReducedKernel> {
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let hbar = spectrum.hbar();
    let mf = matfun_at(spectrum, t);
    let finv = f_inverse(&mf, spectrum)?;
    let m = f_inverse_fdot(&mf, spectrum)?;
    let b = spectrum.b();
    let n_bath = spectrum.dim() - 1;
    let lay = JLayout { n_bath };
    let mut form = GaussianForm::zeros(lay.dim());

    let fin: Vec<usize> = std::iter::once(JLayout::Y0).chain((0..n_bath).map(|k| lay.bar(k))).collect();
    let ini: Vec<usize> = std::iter::once(JLayout::Y01).chain((0..n_bath).map(|k| lay.bar1(k))).collect();
    let fin_c: Vec<usize> = std::iter::once(JLayout::Y0P).chain((0..n_bath).map(|k| lay.bar(k))).collect();
    let ini_c: Vec<usize> = std::iter::once(JLayout::Y02).chain((0..n_bath).map(|k| lay.bar2(k))).collect();
    let i_2hbar = Complex64::new(0.0, 0.5 / hbar);
    add_kernel_exponent(&mut form, &m, &finv, &fin, &ini, i_2hbar);
    add_kernel_exponent(&mut form, &m, &finv, &fin_c, &ini_c, -i_2hbar);

    // |prefactor|^2 of K K*
    let mut log_scale = -(spectrum.dim() as f64) * (2.0 * PI * hbar).ln() - mf.det_f.abs().ln();
    for k in 0..n_bath {
        let w = b[(k + 1, k + 1)].sqrt();
        let x = beta * hbar * w;
        form.add_bilinear(lay.bar1(k), lay.bar1(k), Complex64::new(-w * coth(x) / (2.0 * hbar), 0.0));
        form.add_bilinear(lay.bar2(k), lay.bar2(k), Complex64::new(-w * coth(x) / (2.0 * hbar), 0.0));
        form.add_bilinear(lay.bar1(k), lay.bar2(k), Complex64::new(w * csch(x) / hbar, 0.0));
        // normalized thermal density matrix: sqrt(w / (2 pi hbar sinh x)) * 2 sinh(x/2)
        log_scale += 0.5 * ((w / (2.0 * PI * hbar)).ln() - ln_sinh(x)) + std::f64::consts::LN_2 + ln_sinh(0.5 * x);
    }
    form.log_scale = Complex64::new(log_scale, 0.0);

    let mut reduced = form;
    if n_bath > 0 {
        // Each integration removes the block right after the four main variables.
        let block: Vec<usize> = (4..4 + n_bath).collect();
        for _ in 0..3 {
            reduced = reduced.integrate_out(&block)?;
        }
    }
    let q = reduced.substitute(&sum_difference_map());
    let (xx, xi, x0, xi0) = (0, 1, 2, 3);
    let qq = |a: usize, b: usize| q.q[(a, b)];
    let i = Complex64::new(0.0, 1.0);
    let b1 = i * qq(xx, xi);
    let b2 = i * qq(x0, xi);
    let b3 = -i * qq(xx, xi0);
    let b4 = -i * qq(x0, xi0);
    let a11 = 0.5 * qq(xi, xi);
    let a12 = qq(xi, xi0);
    let a22 = 0.5 * qq(xi0, xi0);
    let residual = [
        qq(xx, xx).norm(),
        qq(x0, x0).norm(),
        qq(xx, x0).norm(),
        b1.im.abs(),
        b2.im.abs(),
        b3.im.abs(),
        b4.im.abs(),
        a11.im.abs(),
        a12.im.abs(),
        a22.im.abs(),
        q.log_scale.im.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(ReducedKernel {
        t,
        beta,
        hbar,
        b1: b1.re,
        b2: b2.re,
        b3: b3.re,
        b4: b4.re,
        a11: a11.re,
        a12: a12.re,
        a22: a22.re,
        normalization: q.log_scale.re.exp(),
        residual,
    })
}

impl ReducedKernel {
    /// `J` in sum/difference coordinates.
    pub fn evaluate(&self, x: f64, xi: f64, x0: f64, xi0: f64) -> Complex64 {
        let phase = self.b1 * x * xi + self.b2 * x0 * xi - self.b3 * x * xi0 - self.b4 * x0 * xi0;
        let damp = -self.a11 * xi * xi - self.a12 * xi * xi0 - self.a22 * xi0 * xi0;
        self.normalization * Complex64::new(damp, phase).exp()
    }

    /// `J` as a Gaussian form over `(X, xi, X0, xi0)`.
    pub fn as_form(&self) -> GaussianForm {
        let mut f = GaussianForm::zeros(4);
        let c = |re: f64, im: f64| Complex64::new(re, im);
        f.add_bilinear(0, 1, c(0.0, self.b1));
        f.add_bilinear(2, 1, c(0.0, self.b2));
        f.add_bilinear(0, 3, c(0.0, -self.b3));
        f.add_bilinear(2, 3, c(0.0, -self.b4));
        f.add_bilinear(1, 1, c(-self.a11, 0.0));
        f.add_bilinear(1, 3, c(-self.a12, 0.0));
        f.add_bilinear(3, 3, c(-self.a22, 0.0));
        f.log_scale = c(self.normalization.ln(), 0.0);
        f
    }
}

/// Add `ln rho` of a single-mode Gaussian over `(X, xi)` at indices `(ix, ixi)`.
fn add_reduced_gaussian(form: &mut GaussianForm, red: &ReducedGaussian, hbar: f64, ix: usize, ixi: usize) {
    let v = red.var_y;
    let m = red.mean_y;
    let c = red.cov_yp;
    let c64 = |re: f64, im: f64| Complex64::new(re, im);
    // -(X - m)^2/(2v)
    form.add_bilinear(ix, ix, c64(-0.5 / v, 0.0));
    form.add_linear(ix, c64(m / v, 0.0));
    // i xi [mean_p + (c/v)(X - m)] / hbar
    form.add_linear(ixi, c64(0.0, (red.mean_p - c * m / v) / hbar));
    form.add_bilinear(ix, ixi, c64(0.0, c / (v * hbar)));
    // -xi^2 (var_p - c^2/v) / (2 hbar^2)
    form.add_bilinear(ixi, ixi, c64(-(red.var_p - c * c / v) / (2.0 * hbar * hbar), 0.0));
    form.log_scale += c64(-m * m / (2.0 * v) - 0.5 * (2.0 * PI * v).ln(), 0.0);
}

/// Read the five Gaussian parameters back from a form over `(X, xi)`.
///
/// Returns the state and the deviation of its trace from one.
fn reduced_from_form(form: &GaussianForm, hbar: f64) -> Result<(ReducedGaussian, f64)> {
    let qxx = form.q[(0, 0)];
    if !(qxx.re > 0.0) {
        return Err(Error::NonPhysicalState(format!("position marginal not normalizable ({qxx})")));
    }
    let i = Complex64::new(0.0, 1.0);
    let v = 1.0 / qxx;
    let m = form.lin[0] * v;
    let c = i * v * hbar * form.q[(0, 1)];
    let mp = -i * hbar * form.lin[1] + c * m / v;
    let p = hbar * hbar * form.q[(1, 1)] + c * c / v;
    let trace = (2.0 * PI / qxx).sqrt() * (form.log_scale + form.lin[0] * form.lin[0] / (2.0 * qxx)).exp();
    let red = ReducedGaussian { mean_y: m.re, mean_p: mp.re, var_y: v.re, var_p: p.re, cov_yp: c.re };
    Ok((red, (trace - 1.0).norm()))
}

/// Closed-form evolution of a Gaussian main state through the reduced kernel.
///
/// Returns the evolved state and the trace defect `|Tr rho(t) - 1|`.
pub fn evolve_gaussian_via_kernel(
    kernel: &ReducedKernel,
    red0: &ReducedGaussian,
) -> Result<(ReducedGaussian, f64)> {
    red0.check(kernel.hbar)?;
    let mut form = kernel.as_form();
    add_reduced_gaussian(&mut form, red0, kernel.hbar, 2, 3);
    let out = form.integrate_out(&[2, 3])?;
    reduced_from_form(&out, kernel.hbar)
}

fn check_uniform_grid(grid: &[f64]) -> Result<f64> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::GridTooCoarse(format!(
            "kernel evolution needs at least {MIN_GRID_POINTS} grid points, got {}",
            grid.len()
        )));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0)
        || grid
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > UNIFORM_GRID_TOLERANCE * h)
    {
        return Err(Error::InvalidInput("grid must be uniform and increasing".into()));
    }
    Ok(h)
}

/// Evolve a grid density matrix through the reduced kernel by 2D Simpson
/// quadrature; input and output share the grid.
pub fn evolve_rho_via_kernel(kernel: &ReducedKernel, rho0: &CMatrix, grid: &[f64]) -> Result<CMatrix> {
    evolve_rho_via_kernel_onto(kernel, rho0, grid, grid)
}

/// As [`evolve_rho_via_kernel`], with the output sampled on `out_grid`.
pub fn evolve_rho_via_kernel_onto(
    kernel: &ReducedKernel,
    rho0: &CMatrix,
    in_grid: &[f64],
    out_grid: &[f64],
) -> Result<CMatrix> {
    let h = check_uniform_grid(in_grid)?;
    let n_in = in_grid.len();
    if rho0.nrows() != n_in || rho0.ncols() != n_in {
        return Err(Error::DimensionMismatch { expected: n_in, got: rho0.nrows() });
    }
    if out_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("output grid must be strictly increasing".into()));
    }
    let w = simpson_weights(n_in - 1, h)?;
    let k = kernel;
    let c = |re: f64, im: f64| Complex64::new(re, im);

    // Input-only factor exp(-i b4 X0 xi0 - a22 xi0^2) times weights and rho0.
    let weighted = CMatrix::from_fn(n_in, n_in, |i, j| {
        let (ui, uj) = (in_grid[i], in_grid[j]);
        let (x0, xi0) = (0.5 * (ui + uj), ui - uj);
        w[i] * w[j] * rho0[(i, j)] * c(-k.a22 * xi0 * xi0, -k.b4 * x0 * xi0).exp()
    });
    // Cross terms i b2 X0 xi - i b3 X xi0 - a12 xi xi0 split by (y0, y0') and (u_i, u_j).
    let alpha_i = c(-k.a12, 0.5 * (k.b2 - k.b3));
    let alpha_j = c(k.a12, 0.5 * (k.b2 + k.b3));
    let beta_i = c(k.a12, -0.5 * (k.b2 + k.b3));
    let beta_j = c(-k.a12, 0.5 * (k.b3 - k.b2));
    let n_out = out_grid.len();
    let e = |coef: Complex64| CMatrix::from_fn(n_out, n_in, |p, i| (coef * out_grid[p] * in_grid[i]).exp());
    let (e1, e2, e3, e4) = (e(alpha_i), e(alpha_j), e(beta_i), e(beta_j));

    let mut out = CMatrix::zeros(n_out, n_out);
    for p in 0..n_out {
        // a[i, j] = e1[p, i] * weighted[i, j] * e2[p, j]
        let mut a = weighted.clone();
        for i in 0..n_in {
            let s = e1[(p, i)];
            for j in 0..n_in {
                a[(i, j)] *= s * e2[(p, j)];
            }
        }
        // row q: sum_i e3[q, i] (a e4^T)[i, q]
        let ae4 = &a * e4.transpose();
        for q in 0..n_out {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n_in {
                acc += e3[(q, i)] * ae4[(i, q)];
            }
            let (y, yp) = (out_grid[p], out_grid[q]);
            let (x, xi) = (0.5 * (y + yp), y - yp);
            out[(p, q)] = k.normalization * acc * c(-k.a11 * xi * xi, k.b1 * x * xi).exp();
        }
    }
    Ok(out)
}
