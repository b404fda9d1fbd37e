//! Time-ordered position matrix elements from the driven propagator.
//!
//! The driven kernel is a generating functional: with the force coupling as
//! `+f.Y` in the Hamiltonian,
//!
//! ```text
//! <y, t| T[Y_mu1(t1) ... Y_mun(tn)] |y', 0> / K = (i hbar)^n (1/K) d^n K^(f) / df_mu1(t1)...df_mun(tn) |_{f = 0}
//! ```
//!
//! The closed forms below are the first two derivatives of the driven
//! kernel's exponent; [`n_point_fd`] differentiates [`evaluate_k_forced`]
//! numerically for any `n`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{f_inverse, matfun_at};
use crate::model::Spectrum;
use crate::propagator::{evaluate_k, evaluate_k_forced, propagator_form, ForceProfile};
use crate::quadrature::simpson_weights;

/// Default spike amplitude for numerical functional derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// `(i hbar)^n` per insertion; the one place the convention constant lives.
fn insertion_factor(hbar: f64) -> Complex64 {
    Complex64::new(0.0, hbar)
}

/// Boundary data `(y, t; y', 0)` of the matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    pub y: DVector<f64>,
    pub yprime: DVector<f64>,
    pub t: f64,
}

impl Endpoint {
    pub fn new(y: DVector<f64>, yprime: DVector<f64>, t: f64) -> Self {
        Self { y, yprime, t }
    }

    fn check(&self, spectrum: &Spectrum) -> Result<()> {
        let n = spectrum.dim();
        for v in [&self.y, &self.yprime] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        if !(self.t > 0.0) {
            return Err(Error::InvalidInput(format!("endpoint time must be positive, got {}", self.t)));
        }
        Ok(())
    }
}

fn check_insertion(spectrum: &Spectrum, end: &Endpoint, t1: f64, mu: usize) -> Result<()> {
    if !(t1 > 0.0 && t1 < end.t) {
        return Err(Error::TimeOutOfRange { t1, t: end.t });
    }
    if mu >= spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: spectrum.dim(), got: mu + 1 });
    }
    Ok(())
}

/// `<y, t| Y_mu(t1) |y', 0> / K = [F^{-1}(t) (F(t - t1) y' + F(t1) y)]_mu`.
pub fn one_point(spectrum: &Spectrum, end: &Endpoint, t1: f64, mu: usize) -> Result<Complex64> {
    end.check(spectrum)?;
    check_insertion(spectrum, end, t1, mu)?;
    let finv = f_inverse(&matfun_at(spectrum, end.t), spectrum)?;
    let path = matfun_at(spectrum, end.t - t1).f * &end.yprime + matfun_at(spectrum, t1).f * &end.y;
    Ok(Complex64::new((finv * path)[mu], 0.0))
}

/// Connected two-point function,
/// `i hbar [X diag(sin(z u) sin(z (t - s)) / (z sin(z t))) X^T]_{mu nu}`
/// with `u = min(t1, t2)`, `s = max(t1, t2)`. Independent of the endpoints.
pub fn connected_two_point(
    spectrum: &Spectrum,
    end: &Endpoint,
    t1: f64,
    mu: usize,
    t2: f64,
    nu: usize,
) -> Result<Complex64> {
    end.check(spectrum)?;
    check_insertion(spectrum, end, t1, mu)?;
    check_insertion(spectrum, end, t2, nu)?;
    // surfaces caustics at t
    f_inverse(&matfun_at(spectrum, end.t), spectrum)?;
    let (u, s) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let t = end.t;
    let x = spectrum.x();
    let kern: f64 = spectrum
        .z()
        .iter()
        .enumerate()
        .map(|(a, &z)| {
            let d = (z * u).sin() * (z * (t - s)).sin() / (z * (z * t).sin());
            (x[(mu, a)] * x[(nu, a)]) * d
        })
        .sum();
    Ok(insertion_factor(spectrum.hbar()) * kern)
}

/// `<y, t| T[Y_mu(t1) Y_nu(t2)] |y', 0> / K`.
pub fn two_point(
    spectrum: &Spectrum,
    end: &Endpoint,
    t1: f64,
    mu: usize,
    t2: f64,
    nu: usize,
) -> Result<Complex64> {
    let m1 = one_point(spectrum, end, t1, mu)?;
    let m2 = one_point(spectrum, end, t2, nu)?;
    Ok(m1 * m2 + connected_two_point(spectrum, end, t1, mu, t2, nu)?)
}

/// Three-point function assembled from closed forms by Wick's rule.
pub fn three_point_wick(spectrum: &Spectrum, end: &Endpoint, ins: [(f64, usize); 3]) -> Result<Complex64> {
    let m: Vec<Complex64> =
        ins.iter().map(|&(ti, mu)| one_point(spectrum, end, ti, mu)).collect::<Result<_>>()?;
    let c = |i: usize, j: usize| connected_two_point(spectrum, end, ins[i].0, ins[i].1, ins[j].0, ins[j].1);
    Ok(m[0] * m[1] * m[2] + m[0] * c(1, 2)? + m[1] * c(0, 2)? + m[2] * c(0, 1)?)
}

/// Request for a numerically differentiated `n`-point function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorRequest {
    /// Insertion times, each in `(0, t)`.
    pub times: Vec<f64>,
    /// Coordinate index of each insertion.
    pub indices: Vec<usize>,
    pub y: Vec<f64>,
    pub yprime: Vec<f64>,
    pub t: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Upper bound on the force grid spacing.
    pub grid_step: f64,
}

fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

impl CorrelatorRequest {
    pub fn endpoint(&self) -> Endpoint {
        Endpoint::new(
            DVector::from_column_slice(&self.y),
            DVector::from_column_slice(&self.yprime),
            self.t,
        )
    }
}

/// Unit-area spike on the force grid: node indices with their amplitudes.
///
/// The spike at `t_i = (j + lambda) h` puts `(1 - lambda)/W_j` on node `j` and
/// `lambda/W_{j+1}` on node `j + 1`, `W` the Simpson weights, so the quadrature
/// of `spike * g` is the linear interpolant of `g` at `t_i`.
fn spike_nodes(ti: f64, h: f64, weights: &[f64]) -> Vec<(usize, f64)> {
    let x = ti / h;
    let last = weights.len() - 1;
    let j = (x.floor() as usize).min(last - 1);
    let lambda = x - j as f64;
    let mut out = vec![(j, (1.0 - lambda) / weights[j])];
    if lambda > 0.0 {
        out.push((j + 1, lambda / weights[j + 1]));
    }
    out
}

/// `<y, t| T[Y_mu1(t1)...Y_mun(tn)] |y', 0> / K` by nested central differences
/// of the driven kernel over spike amplitudes, with one Richardson step.
///
/// The force grid is refined below `request.grid_step` until consecutive
/// spikes are at least four cells apart, so their supports never share a
/// Simpson panel.
pub fn n_point_fd(spectrum: &Spectrum, request: &CorrelatorRequest) -> Result<Complex64> {
    let end = request.endpoint();
    end.check(spectrum)?;
    let n = request.times.len();
    if request.indices.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: request.indices.len() });
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    for (&ti, &mu) in request.times.iter().zip(&request.indices) {
        check_insertion(spectrum, &end, ti, mu)?;
    }
    if !(request.grid_step > 0.0) || !(request.fd_step > 0.0) {
        return Err(Error::InvalidInput("grid_step and fd_step must be positive".into()));
    }
    let mut sorted = request.times.clone();
    sorted.sort_by(f64::total_cmp);
    let mut min_gap = f64::INFINITY;
    for w in sorted.windows(2) {
        if w[1] - w[0] < 2.0 * request.grid_step {
            return Err(Error::StepCollision { a: w[0], b: w[1] });
        }
        min_gap = min_gap.min(w[1] - w[0]);
    }
    let h_max = request.grid_step.min(min_gap / 4.0);
    let mut intervals = (end.t / h_max).ceil() as usize;
    intervals = intervals.max(2);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let h = end.t / intervals as f64;
    let weights = simpson_weights(intervals, h)?;
    let spikes: Vec<Vec<(usize, f64)>> =
        request.times.iter().map(|&ti| spike_nodes(ti, h, &weights)).collect();

    let dim = spectrum.dim();
    let k0 = evaluate_k(&propagator_form(spectrum, end.t)?, &end.y, &end.yprime)?;
    let eval = |amps: &[f64]| -> Result<Complex64> {
        let mut samples = vec![DVector::zeros(dim); intervals + 1];
        for ((sp, &mu), &a) in spikes.iter().zip(&request.indices).zip(amps) {
            for &(node, c) in sp {
                samples[node][mu] += a * c;
            }
        }
        let force = ForceProfile::from_samples(h, samples)?;
        evaluate_k_forced(spectrum, &force, end.t, &end.y, &end.yprime)
    };
    let central = |eps: f64| -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for mask in 0..(1usize << n) {
            let mut sign = 1.0;
            let amps: Vec<f64> = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        sign = -sign;
                        -eps
                    } else {
                        eps
                    }
                })
                .collect();
            acc += sign * eval(&amps)?;
        }
        Ok(acc / (2.0 * eps).powi(n as i32))
    };
    let coarse = central(request.fd_step)?;
    let fine = central(0.5 * request.fd_step)?;
    let derivative = (4.0 * fine - coarse) / 3.0;
    Ok(insertion_factor(spectrum.hbar()).powi(n as i32) * derivative / k0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn model1() -> Model {
        Model::from_pairs(1.2, &[(0.9, 0.4)]).unwrap()
    }

    fn request(times: &[f64], idx: &[usize]) -> CorrelatorRequest {
        CorrelatorRequest {
            times: times.to_vec(),
            indices: idx.to_vec(),
            y: vec![0.4, -0.3],
            yprime: vec![0.2, 0.5],
            t: 1.1,
            fd_step: DEFAULT_FD_STEP,
            grid_step: 0.01,
        }
    }

    #[test]
    fn decoupled_one_point_is_classical_path() {
        let w = 1.3;
        let s = Model::single(w).unwrap().spectrum().unwrap();
        let end = Endpoint::new(v(&[0.7]), v(&[-0.4]), 1.5);
        let t1 = 0.6;
        let got = one_point(&s, &end, t1, 0).unwrap();
        let expect = (-0.4 * (w * (1.5 - t1)).sin() + 0.7 * (w * t1).sin()) / (w * 1.5).sin();
        assert!((got.re - expect).abs() < 1e-13 && got.im == 0.0);
    }

    #[test]
    fn endpoint_pinning() {
        let s = model1().spectrum().unwrap();
        let end = Endpoint::new(v(&[0.4, -0.3]), v(&[0.2, 0.5]), 1.1);
        for mu in 0..2 {
            let late = one_point(&s, &end, 1.1 - 1e-9, mu).unwrap();
            let early = one_point(&s, &end, 1e-9, mu).unwrap();
            assert!((late.re - end.y[mu]).abs() < 1e-6);
            assert!((early.re - end.yprime[mu]).abs() < 1e-6);
        }
        assert!(matches!(one_point(&s, &end, 1.2, 0), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(one_point(&s, &end, 0.0, 0), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn two_point_time_ordering_is_exact() {
        let s = Model::from_pairs(1.5, &[(1.0, 0.4), (2.2, 0.3)]).unwrap().spectrum().unwrap();
        let end = Endpoint::new(v(&[0.4, -0.3, 0.1]), v(&[0.2, 0.5, -0.6]), 1.1);
        for (mu, nu) in [(0, 0), (0, 2), (1, 2)] {
            let a = two_point(&s, &end, 0.3, mu, 0.8, nu).unwrap();
            let b = two_point(&s, &end, 0.8, nu, 0.3, mu).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn connected_part_independent_of_endpoints_and_linear_in_hbar() {
        let m = model1();
        let s = m.spectrum().unwrap();
        let e1 = Endpoint::new(v(&[0.4, -0.3]), v(&[0.2, 0.5]), 1.1);
        let e2 = Endpoint::new(v(&[-1.0, 2.0]), v(&[0.0, 0.3]), 1.1);
        let c1 = connected_two_point(&s, &e1, 0.3, 0, 0.7, 1).unwrap();
        let c2 = connected_two_point(&s, &e2, 0.3, 0, 0.7, 1).unwrap();
        assert_eq!(c1, c2);
        let s2 = s.with_hbar(2.0);
        let c3 = connected_two_point(&s2, &e1, 0.3, 0, 0.7, 1).unwrap();
        assert!((c3 - 2.0 * c1).norm() < 1e-15);
    }

    #[test]
    fn fd_one_point_matches_closed_form() {
        let s = model1().spectrum().unwrap();
        for mu in 0..2 {
            let req = request(&[0.45], &[mu]);
            let fd = n_point_fd(&s, &req).unwrap();
            let cf = one_point(&s, &req.endpoint(), 0.45, mu).unwrap();
            assert!(rel(fd, cf) < 1e-4, "{fd} {cf}");
        }
    }

    #[test]
    fn fd_two_point_matches_closed_form() {
        let s = model1().spectrum().unwrap();
        let req = request(&[0.3, 0.75], &[0, 1]);
        let fd = n_point_fd(&s, &req).unwrap();
        let cf = two_point(&s, &req.endpoint(), 0.3, 0, 0.75, 1).unwrap();
        assert!(rel(fd, cf) < 1e-3, "{fd} {cf}");
    }

    #[test]
    fn fd_three_point_matches_wick() {
        let s = model1().spectrum().unwrap();
        let mut req = request(&[0.2, 0.5, 0.85], &[0, 1, 0]);
        req.fd_step = 1e-3;
        let fd = n_point_fd(&s, &req).unwrap();
        let wick = three_point_wick(&s, &req.endpoint(), [(0.2, 0), (0.5, 1), (0.85, 0)]).unwrap();
        assert!(rel(fd, wick) < 1e-2, "{fd} {wick}");
    }

    #[test]
    fn spikes_too_close_collide() {
        let s = model1().spectrum().unwrap();
        let req = request(&[0.3, 0.31], &[0, 0]);
        assert!(matches!(n_point_fd(&s, &req), Err(Error::StepCollision { .. })));
    }

    #[test]
    fn grid_independence() {
        let s = model1().spectrum().unwrap();
        let mut req = request(&[0.3, 0.8], &[0, 0]);
        let a = n_point_fd(&s, &req).unwrap();
        req.grid_step = 0.005;
        let b = n_point_fd(&s, &req).unwrap();
        assert!(rel(a, b) < 1e-3);
    }
}
