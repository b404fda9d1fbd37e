//! Command-line front end: JSON config in, CSV or JSON tables out.
//!
//! Exit codes: 0 ok, 2 config error, 3 unstable model, 4 caustic,
//! 5 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use log::{debug, info};
use nalgebra::DVector;
use serde::Deserialize;

use crate::correlators::{self, CorrelatorRequest, Endpoint};
use crate::equilibrium::thermal_report;
use crate::error::Error;
use crate::gaussian::{evolve_state, thermal_bath_state};
use crate::matfun::matfun_at;
use crate::model::{validate_model, BathMode, Model, ModelSpec};
use crate::propagator::{drive_displacements, evaluate_k, forced_form, propagator_form, ForceProfile};
use crate::reduced::{kernel_j_coeffs, reduce_to_main, ReducedGaussian};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_CAUSTIC: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Default spacing of the force grid when the config gives none.
const DEFAULT_FORCE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Evolve,
    Equilibrium,
    Kernel,
    Propagate,
    Correlate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "oscbath", version, about = "Exact dynamics of a harmonic oscillator coupled to a harmonic bath")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Model(e) => error_exit_code(e),
        }
    }
}

/// Exit code for each library error class.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::UnstableModel { .. }
        | Error::UnstableDiscretization { .. }
        | Error::NonPositiveEigenvalue { .. } => EXIT_UNSTABLE,
        Error::Caustic { .. } => EXIT_CAUSTIC,
        Error::NonPositiveFrequency { .. }
        | Error::NonPositiveHbar(_)
        | Error::DimensionMismatch { .. }
        | Error::TimeOutOfRange { .. }
        | Error::StepCollision { .. }
        | Error::GridTooCoarse(_)
        | Error::InvalidInput(_) => EXIT_CONFIG,
        Error::EigenFailure
        | Error::PoleInput { .. }
        | Error::AtPole { .. }
        | Error::NonConvergentGaussian(_)
        | Error::NonPhysicalState(_)
        | Error::SingularBlock(_)
        | Error::StepTooLarge { .. } => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhmicSpec {
    pub eta: f64,
    pub cutoff: f64,
    pub n_modes: usize,
    pub omega_max: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub omega0: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub baths: Option<Vec<BathMode>>,
    #[serde(default)]
    pub ohmic: Option<OhmicSpec>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.steps < 1 || !(self.t_end > self.t_start) || !(self.t_start >= 0.0) {
            return Err(CliError::Config(format!(
                "time_grid needs steps >= 1 and t_end > t_start >= 0 (got {:?})",
                self
            )));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = (self.t_end - self.t_start) / self.steps as f64;
        (0..=self.steps).map(|k| self.t_start + k as f64 * dt).collect()
    }
}

/// Force on the main oscillator.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceSpec {
    Constant { value: f64 },
    Sinusoid { amplitude: f64, frequency: f64, #[serde(default)] phase: f64 },
    Sampled { step: f64, values: Vec<f64> },
}

impl ForceSpec {
    /// Force at time `s`; sampled forces are linearly interpolated and vanish
    /// past their last sample.
    pub fn value(&self, s: f64) -> f64 {
        match self {
            ForceSpec::Constant { value } => *value,
            ForceSpec::Sinusoid { amplitude, frequency, phase } => amplitude * (frequency * s + phase).sin(),
            ForceSpec::Sampled { step, values } => {
                let x = s / step;
                if x < 0.0 || values.is_empty() {
                    return 0.0;
                }
                let j = x.floor() as usize;
                if j + 1 >= values.len() {
                    return if j + 1 == values.len() && x == j as f64 { values[j] } else { 0.0 };
                }
                let frac = x - j as f64;
                values[j] * (1.0 - frac) + values[j + 1] * frac
            }
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if let ForceSpec::Sampled { step, values } = self {
            if !(*step > 0.0) || values.len() < 2 {
                return Err(CliError::Config("sampled force needs step > 0 and at least 2 values".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl PositionGrid {
    pub fn nodes(&self) -> Result<Vec<f64>, CliError> {
        if self.points < 2 || !(self.max > self.min) {
            return Err(CliError::Config("grid needs points >= 2 and max > min".into()));
        }
        let h = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.min + i as f64 * h).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelateMethod {
    #[default]
    ClosedForm,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelateConfig {
    #[serde(flatten)]
    pub request: CorrelatorRequest,
    #[serde(default)]
    pub method: CorrelateMethod,
}

/// Single-file run configuration.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub time_grid: Option<TimeGrid>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub force: Option<ForceSpec>,
    #[serde(default)]
    pub force_step: Option<f64>,
    #[serde(default)]
    pub grid: Option<PositionGrid>,
    #[serde(default)]
    pub correlate: Option<CorrelateConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub mean_y: f64,
    pub mean_p: f64,
    pub var_y: f64,
    pub var_p: f64,
    #[serde(default)]
    pub cov_yp: f64,
}

/// Linear Ohmic discretization: `omega_k = k d`, `d = omega_max / n_modes`,
/// `g_k^2 = (2/pi) J(omega_k) omega_k d` with `J(w) = eta w exp(-w / cutoff)`.
pub fn discretize_ohmic(eta: f64, cutoff: f64, n_modes: usize, omega_max: f64) -> Result<Vec<(f64, f64)>, Error> {
    if n_modes < 1 || !(omega_max > 0.0) || !(cutoff > 0.0) || !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "ohmic bath needs n_modes >= 1, omega_max > 0, cutoff > 0, eta >= 0 \
             (got {n_modes}, {omega_max}, {cutoff}, {eta})"
        )));
    }
    let d = omega_max / n_modes as f64;
    Ok((1..=n_modes)
        .map(|k| {
            let w = k as f64 * d;
            let j = eta * w * (-w / cutoff).exp();
            (w, (2.0 / std::f64::consts::PI * j * w * d).sqrt())
        })
        .collect())
}

/// Discretize and validate; an unstable result reports the largest stable `eta`
/// scaled by 0.9.
pub fn ohmic_model(omega0: f64, hbar: f64, spec: &OhmicSpec) -> Result<Model, Error> {
    let pairs = discretize_ohmic(spec.eta, spec.cutoff, spec.n_modes, spec.omega_max)?;
    let baths: Vec<BathMode> = pairs.iter().map(|&(omega, g)| BathMode { omega, g }).collect();
    match validate_model(&ModelSpec { omega0, hbar, baths }) {
        Err(Error::UnstableModel { schur_complement }) => {
            // the coupling sum is linear in eta
            let per_eta = (omega0 * omega0 - schur_complement) / spec.eta;
            Err(Error::UnstableDiscretization {
                schur_complement,
                suggested_eta: 0.9 * omega0 * omega0 / per_eta,
            })
        }
        other => other,
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let m = &self.model;
        match (&m.baths, &m.ohmic) {
            (Some(_), Some(_)) => Err(CliError::Config("model: give either baths or ohmic, not both".into())),
            (_, Some(o)) => Ok(ohmic_model(m.omega0, m.hbar, o)?),
            (b, None) => Ok(validate_model(&ModelSpec {
                omega0: m.omega0,
                hbar: m.hbar,
                baths: b.clone().unwrap_or_default(),
            })?),
        }
    }

    fn time_grid(&self) -> Result<TimeGrid, CliError> {
        let g = self.time_grid.ok_or_else(|| CliError::Config("missing field `time_grid`".into()))?;
        g.validate()?;
        Ok(g)
    }

    fn beta(&self) -> Result<f64, CliError> {
        let b = self.beta.ok_or_else(|| CliError::Config("missing field `beta`".into()))?;
        if !(b > 0.0) {
            return Err(CliError::Config(format!("beta must be positive, got {b}")));
        }
        Ok(b)
    }

    fn force_profile(&self, dim: usize, t: f64) -> Result<Option<ForceProfile>, CliError> {
        let Some(spec) = &self.force else { return Ok(None) };
        spec.validate()?;
        let step = self.force_step.unwrap_or(DEFAULT_FORCE_STEP);
        if !(step > 0.0) {
            return Err(CliError::Config(format!("force_step must be positive, got {step}")));
        }
        let mut n = ((t / step).ceil() as usize).max(2);
        if n % 2 == 1 {
            n += 1;
        }
        Ok(Some(ForceProfile::main_only(dim, t, n, |s| spec.value(s))?))
    }
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<f64>> },
    Complex { re: f64, im: f64 },
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Output::Table { columns, rows }, Format::Csv) => {
                let mut s = columns.join(",");
                s.push('\n');
                for row in rows {
                    let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                s
            }
            (Output::Table { columns, rows }, Format::Json) => {
                let v = serde_json::json!({ "columns": columns, "rows": rows });
                let mut s = serde_json::to_string_pretty(&v).expect("tables serialize");
                s.push('\n');
                s
            }
            (Output::Complex { re, im }, Format::Csv) => format!("re,im\n{},{}\n", fmt_num(*re), fmt_num(*im)),
            (Output::Complex { re, im }, Format::Json) => {
                let mut s = serde_json::to_string_pretty(&serde_json::json!({ "re": re, "im": im }))
                    .expect("numbers serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// Pole-free characteristic residual `g(z^2) prod_k (z^2 - w_k^2)/w_k^2`.
fn char_polynomial_residual(model: &Model, z2: f64) -> f64 {
    let baths = model.baths();
    let w2: Vec<f64> = baths.iter().map(|b| b.omega * b.omega).collect();
    let prod_except = |skip: Option<usize>| -> f64 {
        w2.iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(_, &w)| (z2 - w) / w)
            .product()
    };
    let mut r = (z2 - model.omega0() * model.omega0()) * prod_except(None);
    for (k, b) in baths.iter().enumerate() {
        r -= b.g * b.g / w2[k] * prod_except(Some(k));
    }
    r
}

fn run_spectrum(model: &Model) -> Result<Output, CliError> {
    let s = model.spectrum()?;
    let rows = (0..s.dim())
        .map(|a| {
            let z = s.z()[a];
            vec![a as f64, z, s.x()[(0, a)], char_polynomial_residual(model, z * z)]
        })
        .collect();
    Ok(Output::Table { columns: vec!["alpha", "z", "x0", "char_g_residual"], rows })
}

fn run_evolve(cfg: &RunConfig, model: &Model) -> Result<Output, CliError> {
    let s = model.spectrum()?;
    let beta = cfg.beta()?;
    let main = match cfg.initial_state {
        Some(i) => ReducedGaussian { mean_y: i.mean_y, mean_p: i.mean_p, var_y: i.var_y, var_p: i.var_p, cov_yp: i.cov_yp },
        None => ReducedGaussian::vacuum(model.omega0(), model.hbar()),
    };
    main.check(model.hbar()).map_err(|e| CliError::Config(format!("initial_state: {e}")))?;
    let st0 = thermal_bath_state(model, beta, &main)?;
    let mut rows = Vec::new();
    for t in cfg.time_grid()?.times() {
        let drive = match cfg.force_profile(s.dim(), t)? {
            Some(f) if t > 0.0 => Some(drive_displacements(&s, &f, t)?),
            _ => None,
        };
        let st = evolve_state(&st0, &matfun_at(&s, t), drive.as_ref())?;
        let r = reduce_to_main(&st);
        debug!("evolve t = {t}");
        rows.push(vec![t, r.mean_y, r.mean_p, r.var_y, r.var_p, r.cov_yp, r.purity(model.hbar())]);
    }
    Ok(Output::Table { columns: vec!["t", "mean_y", "mean_p", "var_y", "var_p", "cov_yp", "purity"], rows })
}

fn run_equilibrium(cfg: &RunConfig, model: &Model) -> Result<Output, CliError> {
    let s = model.spectrum()?;
    let betas = match (&cfg.betas, cfg.beta) {
        (Some(b), _) => b.clone(),
        (None, Some(b)) => vec![b],
        (None, None) => return Err(CliError::Config("equilibrium needs `beta` or `betas`".into())),
    };
    let mut rows = Vec::new();
    for b in betas {
        let r = thermal_report(&s, b)?;
        rows.push(vec![r.beta, r.log_z, r.eta, r.mean_sq_y, r.mean_sq_p, r.purity]);
    }
    Ok(Output::Table { columns: vec!["beta", "logZ", "eta", "y2", "p2", "purity"], rows })
}

fn run_kernel(cfg: &RunConfig, model: &Model) -> Result<Output, CliError> {
    let s = model.spectrum()?;
    let beta = cfg.beta()?;
    let mut rows = Vec::new();
    for t in cfg.time_grid()?.times() {
        let k = kernel_j_coeffs(&s, beta, t)?;
        rows.push(vec![t, k.b1, k.b2, k.b3, k.b4, k.a11, k.a12, k.a22]);
    }
    Ok(Output::Table { columns: vec!["t", "b1", "b2", "b3", "b4", "a11", "a12", "a22"], rows })
}

fn run_propagate(cfg: &RunConfig, model: &Model) -> Result<Output, CliError> {
    let s = model.spectrum()?;
    let t = cfg.time_grid()?.t_end;
    let nodes = cfg.grid.ok_or_else(|| CliError::Config("missing field `grid`".into()))?.nodes()?;
    let form = match cfg.force_profile(s.dim(), t)? {
        Some(f) => forced_form(&s, &f, t)?,
        None => propagator_form(&s, t)?,
    };
    let mut rows = Vec::with_capacity(nodes.len() * nodes.len());
    for &y in &nodes {
        for &yp in &nodes {
            let mut yv = DVector::zeros(s.dim());
            let mut ypv = DVector::zeros(s.dim());
            yv[0] = y;
            ypv[0] = yp;
            let k = evaluate_k(&form, &yv, &ypv)?;
            rows.push(vec![y, yp, k.re, k.im]);
        }
    }
    Ok(Output::Table { columns: vec!["y", "yprime", "re", "im"], rows })
}

fn run_correlate(cfg: &RunConfig, model: &Model) -> Result<Output, CliError> {
    let s = model.spectrum()?;
    let c = cfg.correlate.as_ref().ok_or_else(|| CliError::Config("missing field `correlate`".into()))?;
    let r = &c.request;
    let end: Endpoint = r.endpoint();
    let v = match c.method {
        CorrelateMethod::FiniteDifference => correlators::n_point_fd(&s, r)?,
        CorrelateMethod::ClosedForm => {
            if r.indices.len() != r.times.len() {
                return Err(CliError::Config("correlate: times and indices differ in length".into()));
            }
            let ins: Vec<(f64, usize)> = r.times.iter().copied().zip(r.indices.iter().copied()).collect();
            match ins.as_slice() {
                [a] => correlators::one_point(&s, &end, a.0, a.1)?,
                [a, b] => correlators::two_point(&s, &end, a.0, a.1, b.0, b.1)?,
                [a, b, c3] => correlators::three_point_wick(&s, &end, [*a, *b, *c3])?,
                _ => {
                    return Err(CliError::Config(
                        "closed_form supports 1 to 3 insertions; use finite_difference".into(),
                    ))
                }
            }
        }
    };
    Ok(Output::Complex { re: v.re, im: v.im })
}

/// Execute one command on a parsed config.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.model()?;
    info!("model with {} bath modes", model.n_bath());
    match command {
        Command::Spectrum => run_spectrum(&model),
        Command::Evolve => run_evolve(cfg, &model),
        Command::Equilibrium => run_equilibrium(cfg, &model),
        Command::Kernel => run_kernel(cfg, &model),
        Command::Propagate => run_propagate(cfg, &model),
        Command::Correlate => run_correlate(cfg, &model),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", cli.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    let rendered = execute(cli.command, &cfg)?.render(cli.format);
    match &cli.out {
        Some(p) => std::fs::write(p, rendered).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("oscbath: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::equilibrium_moments;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn ohmic_single_mode_formula_and_zero_coupling() {
        let m = discretize_ohmic(0.05, 5.0, 1, 2.0).unwrap();
        let j = 0.05 * 2.0 * (-2.0f64 / 5.0).exp();
        assert!((m[0].1 * m[0].1 - 2.0 / std::f64::consts::PI * j * 2.0 * 2.0).abs() < 1e-15);
        assert!(discretize_ohmic(0.0, 5.0, 8, 4.0).unwrap().iter().all(|&(_, g)| g == 0.0));
    }

    #[test]
    fn ohmic_unstable_suggests_eta() {
        let spec = OhmicSpec { eta: 50.0, cutoff: 5.0, n_modes: 20, omega_max: 10.0 };
        match ohmic_model(1.0, 1.0, &spec) {
            Err(Error::UnstableDiscretization { suggested_eta, .. }) => {
                let ok = OhmicSpec { eta: suggested_eta, ..spec };
                ohmic_model(1.0, 1.0, &ok).unwrap();
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ohmic_convergence_smoke() {
        let y2 = |n: usize| {
            let m = ohmic_model(1.0, 1.0, &OhmicSpec { eta: 0.1, cutoff: 5.0, n_modes: n, omega_max: 20.0 }).unwrap();
            equilibrium_moments(&m.spectrum().unwrap(), 1.0).unwrap().0
        };
        let (a, b) = (y2(200), y2(400));
        assert!(((a - b) / b).abs() < 0.01, "{a} {b}");
    }

    #[test]
    fn spectrum_of_decoupled_model() {
        let c = cfg(r#"{"model": {"omega0": 1.0, "baths": [{"omega": 2.0, "g": 0.0}, {"omega": 3.0, "g": 0.0}]}}"#);
        match execute(Command::Spectrum, &c).unwrap() {
            Output::Table { rows, .. } => {
                let z: Vec<f64> = rows.iter().map(|r| r[1]).collect();
                for (a, b) in z.iter().zip([1.0, 2.0, 3.0]) {
                    assert!((a - b).abs() < 1e-14);
                }
                assert!(rows.iter().all(|r| r[3].abs() < 1e-12));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn evolve_decoupled_thermal_is_stationary() {
        let c = cfg(
            r#"{"model": {"omega0": 1.5, "baths": [{"omega": 1.0, "g": 0.0}]},
                "beta": 1.0, "time_grid": {"t_start": 0.0, "t_end": 4.0, "steps": 8}}"#,
        );
        match execute(Command::Evolve, &c).unwrap() {
            Output::Table { rows, .. } => {
                for r in &rows {
                    assert!((r[3] - rows[0][3]).abs() < 1e-12 && (r[4] - rows[0][4]).abs() < 1e-12);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn equilibrium_sweep_is_monotone() {
        let c = cfg(
            r#"{"model": {"omega0": 1.0, "ohmic": {"eta": 0.1, "cutoff": 5.0, "n_modes": 20, "omega_max": 10.0}},
                "betas": [8.0, 4.0, 2.0, 1.0, 0.5]}"#,
        );
        match execute(Command::Equilibrium, &c).unwrap() {
            Output::Table { rows, .. } => assert!(rows.windows(2).all(|w| w[1][3] > w[0][3])),
            _ => unreachable!(),
        }
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(RunConfig::parse("{").unwrap_err().exit_code(), EXIT_CONFIG);
        let unstable = cfg(r#"{"model": {"omega0": 1.0, "baths": [{"omega": 1.0, "g": 2.0}]}}"#);
        assert_eq!(execute(Command::Spectrum, &unstable).unwrap_err().exit_code(), EXIT_UNSTABLE);
        let caustic = cfg(
            r#"{"model": {"omega0": 1.0}, "beta": 1.0, "time_grid": {"t_start": 0.0, "t_end": 1.0, "steps": 2}}"#,
        );
        assert_eq!(execute(Command::Kernel, &caustic).unwrap_err().exit_code(), EXIT_CAUSTIC);
        assert_eq!(error_exit_code(&Error::NonConvergentGaussian(String::new())), EXIT_NUMERICAL);
        let unknown = RunConfig::parse(r#"{"model": {"omega0": 1.0}, "bogus": 1}"#).unwrap_err();
        assert!(unknown.to_string().contains("bogus"));
    }

    #[test]
    fn csv_format_and_header() {
        let out = Output::Table { columns: vec!["a", "b"], rows: vec![vec![0.1, -2.0]] };
        assert_eq!(out.render(Format::Csv), "a,b\n1.0000000000000001e-1,-2.0000000000000000e0\n");
    }

    #[test]
    fn sampled_force_interpolates() {
        let f = ForceSpec::Sampled { step: 0.5, values: vec![0.0, 1.0, 3.0] };
        assert_eq!(f.value(0.25), 0.5);
        assert_eq!(f.value(1.0), 3.0);
        assert_eq!(f.value(1.2), 0.0);
    }
}
