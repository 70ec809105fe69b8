//! Recovery algorithms: OneShot, DHT, DST and the ℓ1-constrained baseline,
//! plus the thresholding primitives they are built from.

mod algorithms;
mod problem;
mod threshold;

pub use algorithms::{dht, dht_observed, dst, dst_observed, nlcd_lasso, oneshot, resolve_step_size};
pub use problem::DemixProblem;
pub use threshold::{
    hard_threshold, l0_norm, l1_norm, l2_norm, project_l1_ball, soft_threshold, top_k_support,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DemixError, Result};
use crate::transforms::ConstituentVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "oneshot")]
    OneShot,
    #[serde(rename = "dht")]
    Dht,
    #[serde(rename = "dst")]
    Dst,
    #[serde(rename = "nlcdlasso")]
    NlcdLasso,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OneShot => "oneshot",
            Algorithm::Dht => "dht",
            Algorithm::Dst => "dst",
            Algorithm::NlcdLasso => "nlcdlasso",
        }
    }

    /// Whether the algorithm evaluates `g'` and `Θ`.
    pub fn needs_link_calculus(self) -> bool {
        matches!(self, Algorithm::Dht | Algorithm::Dst)
    }

    pub fn run(self, problem: &DemixProblem, config: &SolverConfig) -> Result<SolveResult> {
        match self {
            Algorithm::OneShot => oneshot(problem),
            Algorithm::Dht => dht(problem, config),
            Algorithm::Dst => dst(problem, config),
            Algorithm::NlcdLasso => nlcd_lasso(problem, config),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "oneshot" => Ok(Algorithm::OneShot),
            "dht" => Ok(Algorithm::Dht),
            "dst" => Ok(Algorithm::Dst),
            "nlcdlasso" | "nlcd-lasso" | "lasso" => Ok(Algorithm::NlcdLasso),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown algorithm `{other}` (expected oneshot, dht, dst or nlcdlasso)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum StepSize {
    /// `1/M̂` from a sampled restricted-smoothness estimate, halved whenever
    /// a step would increase the objective.
    #[default]
    Auto,
    Fixed(f64),
}

impl FromStr for StepSize {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(StepSize::Auto);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(StepSize::Fixed)
            .ok_or_else(|| {
                DemixError::InvalidArgument(format!("step size must be `auto` or positive, got `{s}`"))
            })
    }
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::Auto => f.write_str("auto"),
            StepSize::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum Init {
    Zero,
    #[default]
    OneShot,
    Given(ConstituentVector),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    /// `P_{2s}` on the stacked vector.
    #[default]
    Stacked,
    /// `P_s` on each half separately.
    PerBlock,
}

impl FromStr for ProjectionMode {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stacked" | "stacked2s" => Ok(ProjectionMode::Stacked),
            "perblock" | "per-block" | "perblocks" => Ok(ProjectionMode::PerBlock),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown projection mode `{other}` (expected stacked or perblock)"
            ))),
        }
    }
}

pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_REL_TOL: f64 = 1e-7;
pub const DEFAULT_DST_BETA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub step_size: StepSize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub init: Init,
    pub projection: ProjectionMode,
    /// ℓ1 radius for the baseline; `None` means `2√s`.
    pub lasso_radius: Option<f64>,
    /// Soft-threshold weight `β'`; the threshold applied is `β'·η'`.
    pub dst_beta: f64,
    /// Seed for the random supports probed by the automatic step size.
    pub probe_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_size: StepSize::Auto,
            max_iters: DEFAULT_MAX_ITERS,
            rel_tol: DEFAULT_REL_TOL,
            init: Init::OneShot,
            projection: ProjectionMode::Stacked,
            lasso_radius: None,
            dst_beta: DEFAULT_DST_BETA,
            probe_seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let StepSize::Fixed(v) = self.step_size {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DemixError::InvalidArgument(format!("step size must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 {
            return Err(DemixError::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(DemixError::InvalidArgument("rel_tol must be non-negative".into()));
        }
        if let Some(r) = self.lasso_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(DemixError::InvalidArgument(format!("lasso radius must be positive, got {r}")));
            }
        }
        if !(self.dst_beta >= 0.0 && self.dst_beta.is_finite()) {
            return Err(DemixError::InvalidArgument("dst_beta must be non-negative".into()));
        }
        Ok(())
    }
}

/// One row of the per-iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    /// Objective after the iteration: `F` for DHT, `F + β'‖t‖₁` for DST,
    /// `‖x̂_lin − Γt‖₂` for the baseline, absent for OneShot.
    pub loss: Option<f64>,
    pub step_norm: f64,
    pub step_size: f64,
    pub support: usize,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub w_hat: Vec<f64>,
    pub z_hat: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveResult {
    pub fn t_hat(&self) -> ConstituentVector {
        ConstituentVector::from_parts(&self.w_hat, &self.z_hat).expect("equal halves")
    }

    /// Writes the trace as `iter,loss,step_norm,elapsed_ms` rows.
    pub fn write_trace<W: std::io::Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["iter", "loss", "step_norm", "elapsed_ms"])?;
        for r in &self.trace {
            wtr.write_record([
                r.iter.to_string(),
                r.loss.map(|l| l.to_string()).unwrap_or_default(),
                r.step_norm.to_string(),
                r.elapsed_ms.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl Serialize for StepSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StepSize::Auto => s.serialize_str("auto"),
            StepSize::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for StepSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(v) => StepSize::from_str(&v.to_string()),
            Repr::Text(t) => StepSize::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// The initialisations expressible in a config file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Zero,
    #[default]
    OneShot,
}

impl From<InitKind> for Init {
    fn from(k: InitKind) -> Self {
        match k {
            InitKind::Zero => Init::Zero,
            InitKind::OneShot => Init::OneShot,
        }
    }
}

impl FromStr for InitKind {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(InitKind::Zero),
            "oneshot" => Ok(InitKind::OneShot),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown init `{other}` (expected zero or oneshot)"
            ))),
        }
    }
}
