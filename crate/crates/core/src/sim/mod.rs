//! Closed-loop simulation of the benchmark plant with an encrypted
//! controller running next to a plaintext twin.
//!
//! Per step the sensor encodes and encrypts the fresh measurement, the cloud
//! evaluates the controller on ciphertexts, and the actuator decrypts,
//! rescales and applies the input. The plants themselves run in `f64`.

pub mod cli;

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::thread;

use num_bigint::BigInt;
use num_traits::Signed;
use thiserror::Error;

use crate::ckks::{CkksError, CkksParams};
use crate::control::{
    self, decode_control, encode_pi_gains, encode_sf_gains, encrypt_gains, plaintext_pi,
    plaintext_sf, CkksBackend, ControlError, GswBackend, HomomorphicBackend, PaillierBackend,
    PiSpec, StateFeedbackSpec,
};
use crate::encoding::{bound_check, round_scaled, BoundVerdict};
use crate::lwe_gsw::{LweError, LweParams};
use crate::modarith::{reduce_centered, seeded_rng};
use crate::paillier::{PaillierError, PaillierKeys};

/// Largest state magnitude assumed by the overflow pre-flight.
pub const STATE_CAP: f64 = 1e3;

pub const DEFAULT_HORIZON: usize = 50;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("overflow risk: worst-case integer {worst} does not fit modulus {modulus}")]
    OverflowRisk { worst: BigInt, modulus: BigInt },
    #[error("step {step}: {source}")]
    Step { step: usize, source: ControlError },
    #[error("setup failed: {0}")]
    Setup(#[from] ControlError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl SimError {
    /// Process exit status for the CLI: 2 for configuration problems, 3 for
    /// depth-budget or overflow aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) | SimError::Dimension(_) => 2,
            SimError::OverflowRisk { .. } => 3,
            SimError::Step { source, .. } | SimError::Setup(source) if source.is_depth_budget() => 3,
            _ => 1,
        }
    }
}

impl From<PaillierError> for SimError {
    fn from(e: PaillierError) -> Self {
        SimError::Setup(e.into())
    }
}

impl From<LweError> for SimError {
    fn from(e: LweError) -> Self {
        SimError::Config(e.to_string())
    }
}

impl From<CkksError> for SimError {
    fn from(e: CkksError) -> Self {
        SimError::Config(e.to_string())
    }
}

/// `x+ = A x + B u`, `y = C x` with a single input and output.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    x0: Vec<f64>,
}

impl PlantModel {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, x0: Vec<f64>) -> Result<Self, SimError> {
        let n = a.len();
        if n == 0 || a.iter().any(|row| row.len() != n) {
            return Err(SimError::Dimension("A must be square and non-empty".into()));
        }
        for (name, v) in [("B", &b), ("C", &c), ("x0", &x0)] {
            if v.len() != n {
                return Err(SimError::Dimension(format!("{name} has {} entries, A is {n}x{n}", v.len())));
            }
        }
        Ok(PlantModel { a, b, c, x0 })
    }

    /// The three-state benchmark plant started at `(10, 10, 10)`.
    pub fn benchmark() -> Self {
        PlantModel {
            a: vec![
                vec![-0.27, 0.24, 0.08],
                vec![-0.20, -0.35, -0.17],
                vec![0.22, -0.02, 0.36],
            ],
            b: vec![-0.05, 0.11, 0.41],
            c: vec![0.0, 0.0, 1.56],
            x0: vec![10.0; 3],
        }
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn output(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

impl Default for PlantModel {
    fn default() -> Self {
        Self::benchmark()
    }
}

/// Returns `(A x + B u, C x)`.
pub fn plant_step(model: &PlantModel, x: &[f64], u: f64) -> Result<(Vec<f64>, f64), SimError> {
    if x.len() != model.order() {
        return Err(SimError::Dimension(format!(
            "state has {} entries, plant order is {}",
            x.len(),
            model.order()
        )));
    }
    let next = model
        .a
        .iter()
        .zip(&model.b)
        .map(|(row, b)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + b * u)
        .collect();
    Ok((next, model.output(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Scheme {
    Paillier,
    Gsw,
    Ckks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Controller {
    Sf,
    Pi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Mode {
    Partial,
    Full,
}

macro_rules! display_lowercase {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = format!("{self:?}").to_lowercase();
                f.write_str(&s)
            }
        }
    )*};
}
display_lowercase!(Scheme, Controller, Mode);

/// Scheme parameter overrides; unset fields fall back to the demo values of
/// the selected scheme.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemeOverrides {
    pub lambda: Option<u64>,
    pub dim: Option<usize>,
    pub modulus_exp: Option<u32>,
    pub base: Option<u64>,
    pub sigma: Option<f64>,
    pub level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub controller: Controller,
    pub mode: Mode,
    pub scale_exp: u32,
    pub horizon: usize,
    pub seed: u64,
    pub params: SchemeOverrides,
}

impl ExperimentConfig {
    pub fn new(scheme: Scheme, controller: Controller, mode: Mode) -> Self {
        ExperimentConfig {
            scheme,
            controller,
            mode,
            scale_exp: 3,
            horizon: DEFAULT_HORIZON,
            seed: 0,
            params: SchemeOverrides::default(),
        }
    }

    pub fn scale(&self) -> f64 {
        10f64.powi(self.scale_exp as i32)
    }

    pub fn lambda(&self) -> u64 {
        self.params.lambda.unwrap_or(128)
    }

    pub fn dim(&self) -> usize {
        self.params.dim.unwrap_or(4)
    }

    pub fn modulus_exp(&self) -> u32 {
        self.params.modulus_exp.unwrap_or(match self.scheme {
            Scheme::Ckks => 15,
            _ => 20,
        })
    }

    pub fn base(&self) -> u64 {
        self.params.base.unwrap_or(10)
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma.unwrap_or(match self.scheme {
            Scheme::Ckks => crate::ckks::DEMO_SIGMA,
            _ => 3.2,
        })
    }

    pub fn level(&self) -> u32 {
        self.params.level.unwrap_or(2)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.scheme == Scheme::Paillier && self.mode == Mode::Full {
            return Err(SimError::Config(
                "paillier has no ciphertext multiplication; use --mode partial".into(),
            ));
        }
        if self.scheme == Scheme::Ckks && self.controller == Controller::Pi && self.level() < 2 {
            return Err(SimError::Config(format!(
                "ckks PI control needs level >= 2, got {}",
                self.level()
            )));
        }
        if self.scale_exp > 15 {
            return Err(SimError::Config(format!("scale exponent {} exceeds 15", self.scale_exp)));
        }
        if self.scheme == Scheme::Paillier && !(4..=4096).contains(&self.lambda()) {
            return Err(SimError::Config(format!("lambda {} outside [4, 4096]", self.lambda())));
        }
        if self.modulus_exp() == 0 {
            return Err(SimError::Config("modulus exponent must be positive".into()));
        }
        Ok(())
    }

    fn lwe_params(&self) -> Result<LweParams, SimError> {
        Ok(LweParams::new(
            self.dim(),
            BigInt::from(10u8).pow(self.modulus_exp()),
            self.base(),
            self.sigma(),
        )?)
    }

    fn ckks_params(&self) -> Result<CkksParams, SimError> {
        Ok(CkksParams::new(
            self.dim(),
            BigInt::from(10u8).pow(self.modulus_exp()),
            self.scale(),
            self.level(),
            self.sigma(),
        )?
        .with_relin_base(self.base())?)
    }
}

/// Both loops side by side. States and outputs have `horizon + 1` entries,
/// inputs `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub scale: f64,
    pub x: Vec<Vec<f64>>,
    pub x_plain: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub y_plain: Vec<f64>,
    pub u_enc: Vec<f64>,
    pub u_plain: Vec<f64>,
    /// Decrypted PI state integers `z(0), ..., z(horizon)` as signed values;
    /// empty for SF.
    pub controller_state: Vec<BigInt>,
}

impl TrajectoryLog {
    fn start(scale: f64, model: &PlantModel) -> Self {
        let x0 = model.x0().to_vec();
        let y0 = model.output(&x0);
        TrajectoryLog {
            scale,
            x: vec![x0.clone()],
            x_plain: vec![x0],
            y: vec![y0],
            y_plain: vec![y0],
            u_enc: Vec::new(),
            u_plain: Vec::new(),
            controller_state: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.u_enc.len()
    }

    pub fn deviation(&self, k: usize) -> f64 {
        (self.u_enc[k] - self.u_plain[k]).abs()
    }

    fn push(&mut self, model: &PlantModel, u_enc: f64, u_plain: f64) -> Result<(), SimError> {
        let (x, _) = plant_step(model, self.x.last().expect("non-empty"), u_enc)?;
        let (xp, _) = plant_step(model, self.x_plain.last().expect("non-empty"), u_plain)?;
        self.y.push(model.output(&x));
        self.y_plain.push(model.output(&xp));
        self.x.push(x);
        self.x_plain.push(xp);
        self.u_enc.push(u_enc);
        self.u_plain.push(u_plain);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub max_dev_u: f64,
    pub max_dev_y: f64,
    /// `||x(horizon)||_inf` of the encrypted loop.
    pub final_state_norm: f64,
    pub final_plain_norm: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

pub fn compare(log: &TrajectoryLog) -> Summary {
    Summary {
        max_dev_u: max_gap(&log.u_enc, &log.u_plain),
        max_dev_y: max_gap(&log.y, &log.y_plain),
        final_state_norm: inf_norm(log.x.last().expect("non-empty")),
        final_plain_norm: inf_norm(log.x_plain.last().expect("non-empty")),
    }
}

/// Largest pointwise gap between the encrypted-loop outputs of two runs.
pub fn output_gap(a: &TrajectoryLog, b: &TrajectoryLog) -> f64 {
    max_gap(&a.y, &b.y)
}

/// Worst-case magnitude of any integer the cloud produces, assuming states and
/// outputs bounded by [`STATE_CAP`].
pub fn worst_case_integer(config: &ExperimentConfig) -> BigInt {
    let s = config.scale();
    let cap = |exp: i32| round_scaled(STATE_CAP, s.powi(exp)).abs();
    let gain = |g: f64, exp: i32| round_scaled(g, s.powi(exp)).abs();
    match config.controller {
        Controller::Sf => StateFeedbackSpec::benchmark(s)
            .k
            .iter()
            .map(|row| row.iter().map(|&k| gain(k, 1) * cap(1)).sum::<BigInt>())
            .max()
            .unwrap_or_default(),
        Controller::Pi => {
            let pi = PiSpec::benchmark(s);
            let u = gain(pi.ki, 1) * cap(2) + gain(pi.kp, 2) * cap(1);
            let z = cap(2) + gain(pi.dt, 1) * cap(1);
            u.max(z)
        }
    }
}

fn preflight(config: &ExperimentConfig, modulus: &BigInt) -> Result<(), SimError> {
    let worst = worst_case_integer(config);
    match bound_check(&worst, modulus) {
        BoundVerdict::Ok => Ok(()),
        BoundVerdict::OverflowRisk => Err(SimError::OverflowRisk {
            worst,
            modulus: modulus.clone(),
        }),
    }
}

/// Simulates the benchmark plant under `config`.
pub fn simulate(config: &ExperimentConfig) -> Result<TrajectoryLog, SimError> {
    simulate_plant(config, &PlantModel::benchmark())
}

pub fn simulate_plant(config: &ExperimentConfig, model: &PlantModel) -> Result<TrajectoryLog, SimError> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    match config.scheme {
        Scheme::Paillier => {
            let keys = PaillierKeys::generate(config.lambda(), &mut rng)?;
            run(PaillierBackend::new(keys, rng), config, model)
        }
        Scheme::Gsw => run(GswBackend::new(config.lwe_params()?, rng), config, model),
        Scheme::Ckks => run(CkksBackend::new(config.ckks_params()?, rng), config, model),
    }
}

fn at(step: usize) -> impl FnOnce(ControlError) -> SimError {
    move |source| SimError::Step { step, source }
}

fn signed_state<B: HomomorphicBackend>(backend: &B, ct: &B::Ciphertext) -> Result<BigInt, ControlError> {
    Ok(reduce_centered(&backend.decrypt(ct)?, backend.modulus())?)
}

fn run<B: HomomorphicBackend>(
    mut backend: B,
    config: &ExperimentConfig,
    model: &PlantModel,
) -> Result<TrajectoryLog, SimError> {
    preflight(config, backend.modulus())?;
    let s = config.scale();
    let mut log = TrajectoryLog::start(s, model);
    match config.controller {
        Controller::Sf => {
            let spec = StateFeedbackSpec::benchmark(s);
            if spec.k.iter().any(|row| row.len() != model.order()) {
                return Err(SimError::Dimension("gain width differs from plant order".into()));
            }
            let codes = encode_sf_gains(&backend, &spec)?;
            let ct_k = match config.mode {
                Mode::Full => Some(encrypt_gains(&mut backend, &codes)?),
                Mode::Partial => None,
            };
            for k in 0..config.horizon {
                let x = log.x.last().expect("non-empty").clone();
                let ct_x = x
                    .iter()
                    .map(|&v| {
                        let code = backend.encode(v, s)?;
                        backend.encrypt(&code)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(at(k))?;
                let ct_u = match &ct_k {
                    Some(ct_k) => control::sf_eval_full(&backend, ct_k, &ct_x),
                    None => control::sf_eval_partial(&backend, &codes, &ct_x),
                }
                .map_err(at(k))?;
                let z = backend.decrypt(&ct_u[0]).map_err(at(k))?;
                let u = decode_control(&z, s, StateFeedbackSpec::DEPTH, backend.modulus(), backend.repr())
                    .map_err(at(k))?;
                let u_plain = plaintext_sf(&spec.k, log.x_plain.last().expect("non-empty"))[0];
                log.push(model, u, u_plain)?;
            }
        }
        Controller::Pi => {
            let spec = PiSpec::benchmark(s);
            let codes = encode_pi_gains(&backend, &spec)?;
            let ct_gains = match config.mode {
                Mode::Full => Some(codes.try_map(|c| backend.encrypt_gain(c))?),
                Mode::Partial => None,
            };
            let z0 = backend.encode(0.0, s * s)?;
            let mut ct_z = backend.encrypt(&z0)?;
            let mut xc = 0.0;
            for k in 0..config.horizon {
                log.controller_state.push(signed_state(&backend, &ct_z).map_err(at(k))?);
                let y = *log.y.last().expect("non-empty");
                let y_code = backend.encode(y, s).map_err(at(k))?;
                let ct_y = backend.encrypt(&y_code).map_err(at(k))?;
                let (ct_u, z_next) = match &ct_gains {
                    Some(g) => control::pi_step_full(&backend, &ct_z, &ct_y, g),
                    None => control::pi_step_partial(&backend, &ct_z, &ct_y, &codes),
                }
                .map_err(at(k))?;
                let z = backend.decrypt(&ct_u).map_err(at(k))?;
                let u = decode_control(&z, s, PiSpec::DEPTH, backend.modulus(), backend.repr())
                    .map_err(at(k))?;
                let (u_plain, xc_next) = plaintext_pi(&spec, xc, *log.y_plain.last().expect("non-empty"));
                xc = xc_next;
                ct_z = z_next;
                log.push(model, u, u_plain)?;
            }
            let k = config.horizon;
            log.controller_state.push(signed_state(&backend, &ct_z).map_err(at(k))?);
        }
    }
    Ok(log)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub scale_exp: u32,
    pub summary: Summary,
    pub log: TrajectoryLog,
}

/// One simulation per scale exponent, run on separate threads.
pub fn sweep_scaling(config: &ExperimentConfig, exps: &[u32]) -> Result<Vec<SweepPoint>, SimError> {
    thread::scope(|scope| {
        let handles: Vec<_> = exps
            .iter()
            .map(|&e| {
                let cfg = ExperimentConfig {
                    scale_exp: e,
                    ..config.clone()
                };
                scope.spawn(move || {
                    simulate(&cfg).map(|log| SweepPoint {
                        scale_exp: e,
                        summary: compare(&log),
                        log,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

fn num(v: f64) -> String {
    // Adding zero folds -0.0 into 0.0.
    format!("{:.11e}", v + 0.0)
}

/// CSV with header `k,u_enc,u_plain,x1,..,xn,y,dev` and one row per input.
pub fn csv_string(log: &TrajectoryLog) -> String {
    let n = log.x.first().map_or(0, Vec::len);
    let mut out = String::from("k,u_enc,u_plain");
    for i in 1..=n {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",y,dev\n");
    for k in 0..log.horizon() {
        let mut row = vec![k.to_string(), num(log.u_enc[k]), num(log.u_plain[k])];
        row.extend(log.x[k].iter().map(|&v| num(v)));
        row.push(num(log.y[k]));
        row.push(num(log.deviation(k)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(log: &TrajectoryLog, path: &Path) -> Result<(), SimError> {
    fs::write(path, csv_string(log))?;
    Ok(())
}
