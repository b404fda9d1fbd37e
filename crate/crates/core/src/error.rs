use thiserror::Error;

/// Errors raised by the oscillator-bath library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive frequency: {what} = {value}")]
    NonPositiveFrequency { what: String, value: f64 },

    #[error("non-positive hbar: {0}")]
    NonPositiveHbar(f64),

    #[error(
        "unstable model: omega0^2 - sum g_k^2/omega_k^2 = {schur_complement} (must be > 0)"
    )]
    UnstableModel { schur_complement: f64 },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("non-positive eigenvalue {value} of the coupling matrix at mode {mode}")]
    NonPositiveEigenvalue { mode: usize, value: f64 },

    #[error("z^2 = {z2} lies on the pole omega_k^2 of bath mode {mode}")]
    PoleInput { z2: f64, mode: usize },

    #[error("Green function evaluated at a pole (denominator {denominator})")]
    AtPole { denominator: f64 },

    #[error("caustic at t = {t}: |sin(z_{mode} t)| = {sin_abs} below tolerance")]
    Caustic { t: f64, mode: usize, sin_abs: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("Gaussian integral does not converge: {0}")]
    NonConvergentGaussian(String),

    #[error("state violates the uncertainty relation: {0}")]
    NonPhysicalState(String),

    #[error("singular block matrix: {0}")]
    SingularBlock(String),

    #[error("insertion time {t1} outside the open interval (0, {t})")]
    TimeOutOfRange { t1: f64, t: f64 },

    #[error("insertion times {a} and {b} closer than two force-grid steps")]
    StepCollision { a: f64, b: f64 },

    #[error("ODE step {h} exceeds the stability bound {bound}")]
    StepTooLarge { h: f64, bound: f64 },

    #[error("Ohmic discretization is unstable ({schur_complement}); try eta <= {suggested_eta}")]
    UnstableDiscretization { schur_complement: f64, suggested_eta: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
