use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::signal::{generate_signal, Signal};
use crate::diagnostics::cosine_or_zero;
use crate::error::{DemixError, Result};
use crate::links::{Link, LinkKind, DEFAULT_WORKING_RADIUS};
use crate::measurement::{observe, EnsembleKind, MeasurementOperator, NoiseSpec};
use crate::rng::{derive_seed, stream};
use crate::solvers::{
    l2_norm, Algorithm, DemixProblem, InitKind, ProjectionMode, SolveResult, SolverConfig,
    StepSize,
    DEFAULT_DST_BETA, DEFAULT_MAX_ITERS, DEFAULT_REL_TOL,
};
use crate::transforms::{BasisKind, Dictionary};

/// Solver knobs in config-file form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub step_size: StepSize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub init: InitKind,
    pub projection: ProjectionMode,
    pub lasso_radius: Option<f64>,
    pub dst_beta: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            step_size: StepSize::Auto,
            max_iters: DEFAULT_MAX_ITERS,
            rel_tol: DEFAULT_REL_TOL,
            init: InitKind::OneShot,
            projection: ProjectionMode::Stacked,
            lasso_radius: None,
            dst_beta: DEFAULT_DST_BETA,
        }
    }
}

impl SolverSettings {
    pub fn to_config(&self, probe_seed: u64) -> SolverConfig {
        SolverConfig {
            step_size: self.step_size,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            init: self.init.into(),
            projection: self.projection,
            lasso_radius: self.lasso_radius,
            dst_beta: self.dst_beta,
            probe_seed,
        }
    }
}

/// A fully specified synthetic trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialSpec {
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub basis_phi: BasisKind,
    pub basis_psi: BasisKind,
    pub ensemble: EnsembleKind,
    pub link: LinkKind,
    pub link_radius: f64,
    pub tau: f64,
    pub algorithm: Algorithm,
    pub solver: SolverSettings,
    pub seed: u64,
    pub success_threshold: f64,
}

impl Default for TrialSpec {
    fn default() -> Self {
        TrialSpec {
            n: 4096,
            s: 10,
            m: 800,
            basis_phi: BasisKind::Identity,
            basis_psi: BasisKind::Dct,
            ensemble: EnsembleKind::Gaussian,
            link: LinkKind::LinearSine,
            link_radius: DEFAULT_WORKING_RADIUS,
            tau: 0.0,
            algorithm: Algorithm::Dht,
            solver: SolverSettings::default(),
            seed: 0,
            success_threshold: 0.99,
        }
    }
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 || self.m == 0 {
            return Err(DemixError::InvalidArgument(format!(
                "trial sizes must be positive (n={}, s={}, m={})",
                self.n, self.s, self.m
            )));
        }
        if self.s > self.n {
            return Err(DemixError::InvalidArgument(format!(
                "sparsity {} exceeds dimension {}",
                self.s, self.n
            )));
        }
        if !(self.success_threshold > 0.0 && self.success_threshold <= 1.0) {
            return Err(DemixError::InvalidArgument(format!(
                "success threshold must lie in (0, 1], got {}",
                self.success_threshold
            )));
        }
        NoiseSpec::gaussian(self.tau)?;
        self.link()?;
        if self.algorithm.needs_link_calculus() && !self.link()?.has_derivative() {
            return Err(DemixError::Capability {
                link: self.link.name(),
                capability: "the derivative required by this algorithm",
            });
        }
        self.solver.to_config(0).validate()
    }

    pub fn link(&self) -> Result<Link> {
        Link::with_radius(self.link, self.link_radius)
    }

    pub fn dictionary(&self) -> Result<Dictionary> {
        Dictionary::from_kinds(self.basis_phi, self.basis_psi, self.n)
    }
}

/// Outcome of one trial. `l2_err` is `‖t̂ − t‖₂ / ‖t‖₂` and is only reported
/// for algorithms that use the link, since the others recover `t` up to scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub basis_phi: BasisKind,
    pub basis_psi: BasisKind,
    pub ensemble: EnsembleKind,
    pub link: LinkKind,
    pub tau: f64,
    pub seed: u64,
    pub cosine: f64,
    pub cos_w: f64,
    pub cos_z: f64,
    pub l2_err: Option<f64>,
    pub iters: usize,
    pub time_ms: f64,
    pub success: bool,
}

/// The ground-truth signal and the recovery problem a trial would solve,
/// without checking that the algorithm suits the link.
pub fn build_instance(spec: &TrialSpec) -> Result<(Signal, DemixProblem)> {
    let dict = spec.dictionary()?;
    let link = spec.link()?;
    let signal = generate_signal(&dict, spec.s, spec.seed)?;
    let op = MeasurementOperator::sample(
        spec.ensemble,
        spec.m,
        spec.n,
        derive_seed(spec.seed, &[stream::OPERATOR]),
    )?;
    let y = observe(&op, &link, &signal.x, NoiseSpec::gaussian(spec.tau)?, spec.seed)?;
    let problem = DemixProblem::new(op, dict, link, y, spec.s)?;
    Ok((signal, problem))
}

/// Generates the signal, operator and observations for `spec`, solves, and
/// scores the estimate. Everything except `time_ms` is a function of `spec`.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialRecord> {
    run_trial_with_result(spec).map(|(record, _)| record)
}

/// [`run_trial`], also handing back the solver output (estimates and trace).
pub fn run_trial_with_result(spec: &TrialSpec) -> Result<(TrialRecord, SolveResult)> {
    spec.validate()?;
    let (signal, problem) = build_instance(spec)?;
    let config = spec
        .solver
        .to_config(derive_seed(spec.seed, &[stream::DIAGNOSTICS]));

    let start = Instant::now();
    let result = spec.algorithm.run(&problem, &config)?;
    let time_ms = start.elapsed().as_secs_f64() * 1e3;

    let cosine = cosine_or_zero(&signal.x, &result.x_hat);
    let l2_err = spec.algorithm.needs_link_calculus().then(|| {
        let t = signal.t();
        let diff: Vec<f64> = result.t_hat().iter().zip(t.iter()).map(|(a, b)| a - b).collect();
        l2_norm(&diff) / l2_norm(&t)
    });
    let record = TrialRecord {
        algorithm: spec.algorithm,
        n: spec.n,
        s: spec.s,
        m: spec.m,
        basis_phi: spec.basis_phi,
        basis_psi: spec.basis_psi,
        ensemble: spec.ensemble,
        link: spec.link,
        tau: spec.tau,
        seed: spec.seed,
        cosine,
        cos_w: cosine_or_zero(&signal.w, &result.w_hat),
        cos_z: cosine_or_zero(&signal.z, &result.z_hat),
        l2_err,
        iters: result.iterations,
        time_ms,
        success: cosine >= spec.success_threshold,
    };
    Ok((record, result))
}
