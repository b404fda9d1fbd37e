//! Brute-force reference computations for tests.
//!
//! Nothing here calls into the matrix-function, propagator or equilibrium
//! code; the only shared inputs are the coupling matrix and its raw
//! eigendecomposition.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::Spectrum;

/// Largest RK4 step as a fraction of the shortest normal-mode period.
pub const MAX_STEP_FRACTION: f64 = 1e-3;

/// Fixed-step solution of `Fddot = -B F`, `F(0) = 0`, `Fdot(0) = I`.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub f_samples: Vec<DMatrix<f64>>,
    pub fdot_samples: Vec<DMatrix<f64>>,
}

impl OdeSolution {
    /// Index of the sample nearest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        let h = self.times.get(1).map_or(1.0, |t1| t1 - self.times[0]);
        ((t / h).round() as usize).min(self.times.len() - 1)
    }
}

/// Classical RK4 on the first-order system `(F, Fdot)`; the last step is
/// shortened to land exactly on `t_end`.
pub fn integrate_f_ode(b: &DMatrix<f64>, t_end: f64, h: f64) -> Result<OdeSolution> {
    let z_max = b.clone().symmetric_eigenvalues().max().max(0.0).sqrt();
    let bound = MAX_STEP_FRACTION * 2.0 * PI / z_max;
    if !(h > 0.0) || h > bound {
        return Err(Error::StepTooLarge { h, bound });
    }
    let n = b.nrows();
    let mut f = DMatrix::zeros(n, n);
    let mut g = DMatrix::identity(n, n);
    let mut times = vec![0.0];
    let mut fs = vec![f.clone()];
    let mut gs = vec![g.clone()];
    let steps = (t_end / h).ceil() as usize;
    for k in 0..steps {
        let t0 = k as f64 * h;
        let dt = (t_end - t0).min(h);
        let k1f = g.clone();
        let k1g = -(b * &f);
        let k2f = &g + &k1g * (dt / 2.0);
        let k2g = -(b * (&f + &k1f * (dt / 2.0)));
        let k3f = &g + &k2g * (dt / 2.0);
        let k3g = -(b * (&f + &k2f * (dt / 2.0)));
        let k4f = &g + &k3g * dt;
        let k4g = -(b * (&f + &k3f * dt));
        f += (k1f + k2f * 2.0 + k3f * 2.0 + k4f) * (dt / 6.0);
        g += (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (dt / 6.0);
        times.push(t0 + dt);
        fs.push(f.clone());
        gs.push(g.clone());
    }
    Ok(OdeSolution { times, f_samples: fs, fdot_samples: gs })
}

/// Single-oscillator propagator
/// `sqrt(w/(2 pi i hbar sin wt)) exp{(i w/(2 hbar sin wt))[(y^2 + y'^2) cos wt - 2 y y']}`
/// with one extra `-pi/2` phase per half period elapsed.
pub fn mehler_1d(omega: f64, hbar: f64, t: f64, y: f64, yprime: f64) -> Result<Complex64> {
    let s = (omega * t).sin();
    if s.abs() < 1e-8 {
        return Err(Error::Caustic { t, mode: 0, sin_abs: s.abs() });
    }
    let half_periods = (omega * t.abs() / PI).floor();
    let arg = -t.signum() * (PI / 4.0 + half_periods * PI / 2.0);
    let amp = (omega / (2.0 * PI * hbar * s.abs())).sqrt();
    let phase = omega / (2.0 * hbar * s) * ((y * y + yprime * yprime) * (omega * t).cos() - 2.0 * y * yprime);
    Ok(Complex64::from_polar(amp, arg + phase))
}

fn simpson_nodes(a: f64, b: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let n = if points.is_multiple_of(2) { points + 1 } else { points.max(3) };
    let h = (b - a) / (n - 1) as f64;
    let x = (0..n).map(|i| a + i as f64 * h).collect();
    let w = (0..n)
        .map(|i| {
            let c = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (x, w)
}

/// Composite Simpson rule on `[a, b]`; an even `points` is bumped by one.
pub fn quad_1d<T>(f: impl Fn(f64) -> T, a: f64, b: f64, points: usize) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let (x, w) = simpson_nodes(a, b, points);
    x.iter().zip(&w).fold(T::default(), |acc, (&xi, &wi)| acc + f(xi) * wi)
}

/// Tensor-product Simpson rule on `[x0, x1] x [y0, y1]`.
pub fn quad_2d<T>(f: impl Fn(f64, f64) -> T, bx: (f64, f64), by: (f64, f64), points: usize) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let (x, wx) = simpson_nodes(bx.0, bx.1, points);
    let (y, wy) = simpson_nodes(by.0, by.1, points);
    let mut acc = T::default();
    for (&xi, &wxi) in x.iter().zip(&wx) {
        for (&yj, &wyj) in y.iter().zip(&wy) {
            acc = acc + f(xi, yj) * (wxi * wyj);
        }
    }
    acc
}

/// Thermal `(<y0^2>, <p0^2>)` summed over normal modes.
pub fn normal_mode_thermal(spectrum: &Spectrum, beta: f64) -> (f64, f64) {
    let hbar = spectrum.hbar();
    let x = spectrum.x();
    let mut y2 = 0.0;
    let mut p2 = 0.0;
    for (a, &z) in spectrum.z().iter().enumerate() {
        let c = 1.0 / (0.5 * beta * hbar * z).tanh();
        let w = x[(0, a)] * x[(0, a)];
        y2 += w * hbar / (2.0 * z) * c;
        p2 += w * hbar * z / 2.0 * c;
    }
    (y2, p2)
}

/// `ln Z` from the level sums `sum_n exp(-beta hbar z (n + 1/2))`, truncated
/// once a term drops below `1e-18` of the running total.
pub fn partition_series(z: &[f64], hbar: f64, beta: f64) -> f64 {
    z.iter()
        .map(|&w| {
            let mut total = 0.0;
            let mut n = 0u32;
            loop {
                let term = (-beta * hbar * w * (n as f64 + 0.5)).exp();
                total += term;
                if term < 1e-18 * total || n > 1_000_000 {
                    break;
                }
                n += 1;
            }
            total.ln()
        })
        .sum()
}

/// Uniform position grid for the split-operator propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveGrid {
    pub y_min: f64,
    pub dy: f64,
    pub points: usize,
}

impl WaveGrid {
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy
    }
}

/// Strang-split evolution of `psi` under
/// `H = p^2/2 + omega^2 y^2/2 + force(s) y` (unit mass) from `0` to `t` in
/// `slices` steps; the potential is evaluated at each slice midpoint.
pub fn split_operator_1d(
    psi0: &[Complex64],
    grid: WaveGrid,
    hbar: f64,
    omega: f64,
    force: impl Fn(f64) -> f64,
    t: f64,
    slices: usize,
) -> Vec<Complex64> {
    let n = grid.points;
    assert_eq!(psi0.len(), n);
    let dt = t / slices as f64;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let dk = 2.0 * PI / (n as f64 * grid.dy);
    let kinetic: Vec<Complex64> = (0..n)
        .map(|m| {
            let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 } * dk;
            let p = hbar * k;
            Complex64::from_polar(1.0, -p * p / 2.0 * dt / hbar) / n as f64
        })
        .collect();
    let mut psi = psi0.to_vec();
    for step in 0..slices {
        let s = (step as f64 + 0.5) * dt;
        let fs = force(s);
        let half_v: Vec<Complex64> = (0..n)
            .map(|j| {
                let y = grid.y(j);
                let v = 0.5 * omega * omega * y * y + fs * y;
                Complex64::from_polar(1.0, -v * dt / (2.0 * hbar))
            })
            .collect();
        for (p, h) in psi.iter_mut().zip(&half_v) {
            *p *= h;
        }
        fwd.process(&mut psi);
        for (p, k) in psi.iter_mut().zip(&kinetic) {
            *p *= k;
        }
        inv.process(&mut psi);
        for (p, h) in psi.iter_mut().zip(&half_v) {
            *p *= h;
        }
    }
    psi
}
