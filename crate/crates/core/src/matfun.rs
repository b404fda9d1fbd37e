//! Matrix functions of `B` in real and imaginary time.
//!
//! `F(t) = sin(sqrt(B) t)/sqrt(B)` and `Fdot(t) = cos(sqrt(B) t)` are built
//! from the normal-mode decomposition, never from the power series.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::Spectrum;

/// `|sin(z_alpha t)|` below this marks a caustic (focal time).
pub const CAUSTIC_TOLERANCE: f64 = 1e-8;

/// Beyond this value of `z_alpha hbar beta` hyperbolic ratios use their
/// asymptotic limits.
pub const HYPERBOLIC_ASYMPTOTE: f64 = 700.0;

/// `F`, `Fdot`, `Fddot` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct MatFun {
    pub t: f64,
    pub f: DMatrix<f64>,
    pub fdot: DMatrix<f64>,
    pub fddot: DMatrix<f64>,
    /// `det F = prod_alpha sin(z_alpha t)/z_alpha`.
    pub det_f: f64,
    /// `sin(z_alpha t)` per normal mode.
    pub mode_sines: DVector<f64>,
    /// Per-mode caustic markers, `|sin(z_alpha t)| < CAUSTIC_TOLERANCE`.
    pub caustic_flags: Vec<bool>,
}

impl MatFun {
    pub fn has_caustic(&self) -> bool {
        self.caustic_flags.iter().any(|&c| c)
    }

    fn check_caustic(&self, eps: f64) -> Result<()> {
        match self
            .mode_sines
            .iter()
            .enumerate()
            .find(|(_, s)| s.abs() < eps)
        {
            Some((mode, s)) => Err(Error::Caustic { t: self.t, mode, sin_abs: s.abs() }),
            None => Ok(()),
        }
    }
}

pub fn matfun_at(spectrum: &Spectrum, t: f64) -> MatFun {
    let z = spectrum.z();
    let f = spectrum.mode_function(|z| (z * t).sin() / z);
    let fdot = spectrum.mode_function(|z| (z * t).cos());
    let fddot = spectrum.mode_function(|z| -z * (z * t).sin());
    let mode_sines = z.map(|z| (z * t).sin());
    let det_f = z.iter().zip(mode_sines.iter()).map(|(z, s)| s / z).product();
    let caustic_flags = mode_sines.iter().map(|s| s.abs() < CAUSTIC_TOLERANCE).collect();
    MatFun { t, f, fdot, fddot, det_f, mode_sines, caustic_flags }
}

/// `F^{-1}(t) = X diag(z_alpha / sin(z_alpha t)) X^T` with the default caustic tolerance.
pub fn f_inverse(matfun: &MatFun, spectrum: &Spectrum) -> Result<DMatrix<f64>> {
    f_inverse_with_tolerance(matfun, spectrum, CAUSTIC_TOLERANCE)
}

pub fn f_inverse_with_tolerance(
    matfun: &MatFun,
    spectrum: &Spectrum,
    eps: f64,
) -> Result<DMatrix<f64>> {
    matfun.check_caustic(eps)?;
    let t = matfun.t;
    Ok(spectrum.mode_function(|z| z / (z * t).sin()))
}

/// `F^{-1} Fdot = X diag(z_alpha cot(z_alpha t)) X^T`.
pub fn f_inverse_fdot(matfun: &MatFun, spectrum: &Spectrum) -> Result<DMatrix<f64>> {
    matfun.check_caustic(CAUSTIC_TOLERANCE)?;
    let t = matfun.t;
    Ok(spectrum.mode_function(|z| z * (z * t).cos() / (z * t).sin()))
}

/// Partition of two symmetric `(N+1)x(N+1)` matrices into main-oscillator
/// and bath blocks:
///
/// ```text
/// F^{-1} Fdot = | a     Bvec^T |      F^{-1} = | b     Cvec^T |
///               | Bvec  A      |               | Cvec  D      |
/// ```
///
/// The same struct stores the real analogs of these blocks at imaginary time.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub a: f64,
    pub b: f64,
    pub bvec: DVector<f64>,
    pub cvec: DVector<f64>,
    pub a_mat: DMatrix<f64>,
    pub d_mat: DMatrix<f64>,
}

impl Blocks {
    /// Split `(m, finv)` into blocks.
    pub fn partition(m: &DMatrix<f64>, finv: &DMatrix<f64>) -> Self {
        let n = m.nrows() - 1;
        Self {
            a: m[(0, 0)],
            b: finv[(0, 0)],
            bvec: m.view((1, 0), (n, 1)).column(0).into_owned(),
            cvec: finv.view((1, 0), (n, 1)).column(0).into_owned(),
            a_mat: m.view((1, 1), (n, n)).into_owned(),
            d_mat: finv.view((1, 1), (n, n)).into_owned(),
        }
    }

    /// Reassemble `(F^{-1} Fdot, F^{-1})`.
    pub fn assemble(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let join = |s: f64, v: &DVector<f64>, blk: &DMatrix<f64>| {
            let n = v.len();
            let mut out = DMatrix::zeros(n + 1, n + 1);
            out[(0, 0)] = s;
            for k in 0..n {
                out[(0, k + 1)] = v[k];
                out[(k + 1, 0)] = v[k];
            }
            out.view_mut((1, 1), (n, n)).copy_from(blk);
            out
        };
        (join(self.a, &self.bvec, &self.a_mat), join(self.b, &self.cvec, &self.d_mat))
    }

    pub fn n_bath(&self) -> usize {
        self.bvec.len()
    }
}

pub fn blocks_at(matfun: &MatFun, spectrum: &Spectrum) -> Result<Blocks> {
    let finv = f_inverse(matfun, spectrum)?;
    let m = f_inverse_fdot(matfun, spectrum)?;
    Ok(Blocks::partition(&m, &finv))
}

/// Real hyperbolic matrix functions at imaginary time `t = -i hbar beta`.
///
/// With `x_alpha = z_alpha hbar beta`:
/// `F(-i hbar beta) = -i Fh`, `Fdot(-i hbar beta) = Fdoth`, and
/// `F^{-1} Fdot = i X diag(z coth x) X^T`, `F^{-1} = i X diag(z / sinh x) X^T`.
/// `blocks` holds the partition of those two real matrices, so each real-time
/// quantity `a, b, B_k, C_k, A, D` continues to `i` times its entry here.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicBlocks {
    pub beta: f64,
    /// `X diag(sinh(x)/z) X^T`; entries overflow to infinity past `x ~ 710`.
    pub fh: DMatrix<f64>,
    /// `X diag(cosh x) X^T`; entries overflow to infinity past `x ~ 710`.
    pub fdoth: DMatrix<f64>,
    /// Real analogs of `(a, b, Bvec, Cvec, A, D)`.
    pub blocks: Blocks,
    /// `x_alpha = z_alpha hbar beta`.
    pub mode_args: DVector<f64>,
}

impl HyperbolicBlocks {
    /// `log det(Fdoth - I) = sum_alpha log(cosh x_alpha - 1)`, overflow-free.
    pub fn log_det_fdoth_minus_identity(&self) -> f64 {
        self.mode_args
            .iter()
            .map(|&x| std::f64::consts::LN_2 + 2.0 * ln_sinh(x / 2.0))
            .sum()
    }

    /// Real analog of `F^{-1}(Fdot - I)`, i.e. `X diag(z tanh(x/2)) X^T`.
    pub fn finv_fdot_minus_identity(&self) -> DMatrix<f64> {
        let (m, finv) = self.blocks.assemble();
        m - finv
    }
}

/// `ln sinh(y)` for `y > 0` without overflow.
pub(crate) fn ln_sinh(y: f64) -> f64 {
    if y > 20.0 {
        y - std::f64::consts::LN_2 + (-(-2.0 * y).exp()).ln_1p()
    } else {
        y.sinh().ln()
    }
}

pub(crate) fn coth(x: f64) -> f64 {
    if x > HYPERBOLIC_ASYMPTOTE {
        1.0
    } else {
        1.0 / x.tanh()
    }
}

pub(crate) fn csch(x: f64) -> f64 {
    if x > HYPERBOLIC_ASYMPTOTE {
        0.0
    } else {
        let e = (-x).exp();
        2.0 * e / (1.0 - e * e)
    }
}

pub fn imaginary_time_blocks(spectrum: &Spectrum, beta: f64) -> Result<HyperbolicBlocks> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive and finite, got {beta}")));
    }
    let hb = spectrum.hbar() * beta;
    let fh = spectrum.mode_function(|z| (z * hb).sinh() / z);
    let fdoth = spectrum.mode_function(|z| (z * hb).cosh());
    let m = spectrum.mode_function(|z| z * coth(z * hb));
    let finv = spectrum.mode_function(|z| z * csch(z * hb));
    Ok(HyperbolicBlocks {
        beta,
        fh,
        fdoth,
        blocks: Blocks::partition(&m, &finv),
        mode_args: spectrum.z().map(|z| z * hb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn model3() -> Model {
        Model::from_pairs(2.0, &[(1.0, 0.6), (3.0, 1.1), (1.7, -0.4)]).unwrap()
    }

    #[test]
    fn initial_values() {
        let s = model3().spectrum().unwrap();
        let m = matfun_at(&s, 0.0);
        assert_eq!(m.f.amax(), 0.0);
        assert!((&m.fdot - DMatrix::identity(4, 4)).amax() < 1e-15);
        assert!(m.has_caustic());
    }

    #[test]
    fn decoupled_is_diagonal() {
        let s = Model::from_pairs(1.0, &[(2.0, 0.0), (3.0, 0.0)]).unwrap().spectrum().unwrap();
        let t = 0.37;
        let m = matfun_at(&s, t);
        for (mu, w) in [1.0f64, 2.0, 3.0].into_iter().enumerate() {
            assert!((m.f[(mu, mu)] - (w * t).sin() / w).abs() < 1e-15);
        }
        let finv = f_inverse(&m, &s).unwrap();
        for (mu, w) in [1.0f64, 2.0, 3.0].into_iter().enumerate() {
            assert!((finv[(mu, mu)] - w / (w * t).sin()).abs() < 1e-13);
        }
        assert!(finv[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn caustic_detected() {
        let s = Model::single(1.0).unwrap().spectrum().unwrap();
        let m = matfun_at(&s, std::f64::consts::PI);
        assert!(matches!(f_inverse(&m, &s), Err(Error::Caustic { mode: 0, .. })));
        assert!(matches!(blocks_at(&m, &s), Err(Error::Caustic { .. })));
    }

    #[test]
    fn inverse_and_identities() {
        let s = model3().spectrum().unwrap();
        let b = s.b().clone();
        let m = matfun_at(&s, 0.7);
        let finv = f_inverse(&m, &s).unwrap();
        assert!((&finv * &m.f - DMatrix::identity(4, 4)).amax() < 1e-9);
        let trig = &m.fdot * &m.fdot + &b * &m.f * &m.f;
        assert!((trig - DMatrix::identity(4, 4)).amax() < 1e-10);
        assert!((&m.fddot + &b * &m.f).amax() < 1e-10);
        // F commutes with B
        assert!((&b * &m.f - &m.f * &b).amax() < 1e-12);
        let lu_det = m.f.clone().lu().determinant();
        assert!((lu_det - m.det_f).abs() < 1e-8 * m.det_f.abs());
    }

    #[test]
    fn parity() {
        let s = model3().spectrum().unwrap();
        for t in [0.3, 1.9, 4.4] {
            let p = matfun_at(&s, t);
            let n = matfun_at(&s, -t);
            assert!((&p.f + &n.f).amax() < 1e-14);
            assert!((&p.fdot - &n.fdot).amax() < 1e-14);
        }
    }

    #[test]
    fn blocks_decoupled_and_symmetric() {
        let w = 1.3;
        let t = 0.8;
        let s = Model::from_pairs(w, &[(2.0, 0.0), (0.5, 0.0)]).unwrap().spectrum().unwrap();
        let blk = blocks_at(&matfun_at(&s, t), &s).unwrap();
        assert!((blk.a - w / (w * t).tan()).abs() < 1e-13);
        assert!((blk.b - w / (w * t).sin()).abs() < 1e-13);
        assert!(blk.bvec.amax() < 1e-15 && blk.cvec.amax() < 1e-15);
        assert!(blk.a_mat[(0, 1)].abs() < 1e-15 && blk.d_mat[(1, 0)].abs() < 1e-15);

        let s = model3().spectrum().unwrap();
        let mf = matfun_at(&s, 1.1);
        let blk = blocks_at(&mf, &s).unwrap();
        let (m, finv) = blk.assemble();
        assert!((&m - m.transpose()).amax() < 1e-9);
        assert!((&finv - finv.transpose()).amax() < 1e-9);
        assert!((&m - f_inverse_fdot(&mf, &s).unwrap()).amax() < 1e-13 * m.amax());
        assert!((&finv - f_inverse(&mf, &s).unwrap()).amax() < 1e-13 * finv.amax());
        // LU route for F^{-1} Fdot
        let lu = mf.f.clone().lu().solve(&mf.fdot).unwrap();
        assert!((lu - m).amax() < 1e-9);
    }

    #[test]
    fn hyperbolic_decoupled_continuation() {
        let (w, beta) = (1.4, 0.9);
        let s = Model::single(w).unwrap().spectrum().unwrap();
        let h = imaginary_time_blocks(&s, beta).unwrap();
        // a - b continues to i w tanh(beta w / 2)
        let diff = h.blocks.a - h.blocks.b;
        assert!((diff - w * (beta * w / 2.0).tanh()).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_determinant_and_asymptotics() {
        let s = model3().spectrum().unwrap();
        let h = imaginary_time_blocks(&s, 0.7).unwrap();
        let id = DMatrix::identity(4, 4);
        let det = (&h.fdoth - &id).lu().determinant();
        let product: f64 = h.mode_args.iter().map(|x| x.cosh() - 1.0).product();
        assert!((det - product).abs() < 1e-10 * product);
        assert!((h.log_det_fdoth_minus_identity() - product.ln()).abs() < 1e-12);

        // large beta: cosh ~ e^x / 2, no overflow in the ratios
        let big = imaginary_time_blocks(&s, 30.0).unwrap();
        let top = s.dim() - 1;
        let x = big.mode_args[top];
        let c = big.fdoth.clone();
        let diag_normal = (s.x().transpose() * c * s.x())[(top, top)];
        assert!((diag_normal / (x.exp() / 2.0) - 1.0).abs() < 1e-10);
        let huge = imaginary_time_blocks(&s, 1e4).unwrap();
        assert!(huge.blocks.a.is_finite() && huge.blocks.b == 0.0);
        assert!(huge.log_det_fdoth_minus_identity().is_finite());
    }
}
