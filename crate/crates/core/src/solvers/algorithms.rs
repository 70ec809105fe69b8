use std::time::Instant;

use super::threshold::{hard_threshold, hard_threshold_in_place, l0_norm, l1_norm, l2_norm};
use super::threshold::{project_l1_ball, soft_threshold_in_place};
use super::{DemixProblem, Init, ProjectionMode, SolveResult, SolverConfig, StepSize, TraceRecord};
use crate::diagnostics::estimate_rsc_rss;
use crate::error::{DemixError, Result};
use crate::transforms::ConstituentVector;

/// Random supports probed when the step size is chosen automatically.
const AUTO_STEP_PROBES: usize = 3;
/// Largest number of consecutive step halvings within one iteration.
const MAX_HALVINGS: usize = 60;

fn elapsed_ms(start: &Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn finish(problem: &DemixProblem, t: ConstituentVector, trace: Vec<TraceRecord>, converged: bool) -> SolveResult {
    let x_hat = problem.dictionary().apply(&t).expect("dimension checked");
    let iterations = trace.len();
    let (w, z) = t.split();
    SolveResult {
        w_hat: w.to_vec(),
        z_hat: z.to_vec(),
        x_hat,
        trace,
        iterations,
        converged,
    }
}

/// Non-iterative estimate: hard-threshold each basis' view of `(1/m) Aᵀy`.
pub fn oneshot(problem: &DemixProblem) -> Result<SolveResult> {
    let start = Instant::now();
    let s = problem.sparsity();
    let x_lin = problem.linear_estimate();
    let w_hat = hard_threshold(&problem.dictionary().phi().adjoint(&x_lin)?, s);
    let z_hat = hard_threshold(&problem.dictionary().psi().adjoint(&x_lin)?, s);
    let t = ConstituentVector::from_parts(&w_hat, &z_hat)?;
    let trace = vec![TraceRecord {
        iter: 1,
        loss: None,
        step_norm: l2_norm(&t),
        step_size: 0.0,
        support: l0_norm(&t),
        elapsed_ms: elapsed_ms(&start),
    }];
    Ok(finish(problem, t, trace, true))
}

/// The step size a gradient method would use from `t0`: the fixed value, or
/// `1/M̂` with `M̂` the largest restricted-Hessian eigenvalue found on
/// supports of size `6s` around `t0`.
pub fn resolve_step_size(problem: &DemixProblem, config: &SolverConfig, t0: &[f64]) -> Result<f64> {
    match config.step_size {
        StepSize::Fixed(v) => Ok(v),
        StepSize::Auto => {
            let level = (6 * problem.sparsity()).clamp(1, 2 * problem.dim());
            let est = estimate_rsc_rss(problem, t0, level, AUTO_STEP_PROBES, config.probe_seed)?;
            if est.m_upper > 0.0 && est.m_upper.is_finite() {
                Ok(1.0 / est.m_upper)
            } else {
                Err(DemixError::NonFinite {
                    quantity: "smoothness estimate",
                    iteration: 0,
                })
            }
        }
    }
}

fn initial_iterate(problem: &DemixProblem, init: &Init) -> Result<ConstituentVector> {
    let n = problem.dim();
    match init {
        Init::Zero => Ok(ConstituentVector::zeros(n)),
        Init::OneShot => {
            let r = oneshot(problem)?;
            ConstituentVector::from_parts(&r.w_hat, &r.z_hat)
        }
        Init::Given(t) => {
            crate::error::check_len("initial iterate", 2 * n, t.len())?;
            Ok(t.clone())
        }
    }
}

enum Shrink {
    Hard(ProjectionMode),
    Soft(f64),
}

impl Shrink {
    fn apply(&self, t: &mut [f64], sparsity: usize, step: f64) {
        match *self {
            Shrink::Hard(ProjectionMode::Stacked) => hard_threshold_in_place(t, 2 * sparsity),
            Shrink::Hard(ProjectionMode::PerBlock) => {
                let n = t.len() / 2;
                let (w, z) = t.split_at_mut(n);
                hard_threshold_in_place(w, sparsity);
                hard_threshold_in_place(z, sparsity);
            }
            Shrink::Soft(beta) => {
                soft_threshold_in_place(t, beta * step).expect("non-negative threshold")
            }
        }
    }

    fn penalty(&self, t: &[f64]) -> f64 {
        match *self {
            Shrink::Hard(_) => 0.0,
            Shrink::Soft(beta) => beta * l1_norm(t),
        }
    }
}

/// Shared loop for the hard- and soft-thresholded gradient iterations.
fn thresholded_gradient<F>(
    problem: &DemixProblem,
    config: &SolverConfig,
    shrink: Shrink,
    observer: &mut F,
) -> Result<SolveResult>
where
    F: FnMut(usize, &[f64]),
{
    config.validate()?;
    problem.link().require_derivative()?;
    problem.link().require_potential()?;
    let start = Instant::now();
    let s = problem.sparsity();
    let mut t = initial_iterate(problem, &config.init)?;
    if s == 0 {
        return Ok(finish(problem, ConstituentVector::zeros(problem.dim()), Vec::new(), true));
    }
    let mut step = resolve_step_size(problem, config, &t)?;
    let backtrack = config.step_size == StepSize::Auto;

    let mut u = problem.forward(&t)?;
    let mut objective = problem.loss_from_forward(&u) + shrink.penalty(&t);
    if !objective.is_finite() {
        return Err(DemixError::NonFinite {
            quantity: "loss",
            iteration: 0,
        });
    }
    observer(0, &t);

    let mut trace = Vec::with_capacity(config.max_iters.min(4096));
    let mut converged = false;
    let mut candidate = t.clone();
    for iter in 1..=config.max_iters {
        let grad = problem.gradient_from_forward(&u);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(DemixError::NonFinite {
                quantity: "gradient",
                iteration: iter,
            });
        }
        let mut halvings = 0;
        let (u_next, obj_next) = loop {
            candidate
                .iter_mut()
                .zip(t.iter().zip(grad.iter()))
                .for_each(|(c, (ti, gi))| *c = ti - step * gi);
            shrink.apply(&mut candidate, s, step);
            let u_c = problem.forward(&candidate)?;
            let obj = problem.loss_from_forward(&u_c) + shrink.penalty(&candidate);
            let rises = !(obj <= objective + 1e-12 * objective.abs().max(1.0));
            if backtrack && rises && halvings < MAX_HALVINGS {
                step *= 0.5;
                halvings += 1;
                continue;
            }
            break (u_c, obj);
        };
        if !obj_next.is_finite() {
            return Err(DemixError::NonFinite {
                quantity: "loss",
                iteration: iter,
            });
        }
        let t_norm = l2_norm(&t);
        let step_norm = t
            .iter()
            .zip(candidate.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut t, &mut candidate);
        u = u_next;
        objective = obj_next;
        observer(iter, &t);
        trace.push(TraceRecord {
            iter,
            loss: Some(objective),
            step_norm,
            step_size: step,
            support: l0_norm(&t),
            elapsed_ms: elapsed_ms(&start),
        });
        if step_norm <= config.rel_tol * t_norm.max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(finish(problem, t, trace, converged))
}

/// Demixing with hard thresholding: `t ← P(t − η'∇F(t))`.
pub fn dht(problem: &DemixProblem, config: &SolverConfig) -> Result<SolveResult> {
    dht_observed(problem, config, |_, _| {})
}

/// [`dht`], calling `observer(k, t^k)` on the initial point and after every
/// iteration.
pub fn dht_observed<F>(problem: &DemixProblem, config: &SolverConfig, mut observer: F) -> Result<SolveResult>
where
    F: FnMut(usize, &[f64]),
{
    thresholded_gradient(problem, config, Shrink::Hard(config.projection), &mut observer)
}

/// Demixing with soft thresholding: `t ← S_{β'η'}(t − η'∇F(t))`.
pub fn dst(problem: &DemixProblem, config: &SolverConfig) -> Result<SolveResult> {
    dst_observed(problem, config, |_, _| {})
}

pub fn dst_observed<F>(problem: &DemixProblem, config: &SolverConfig, mut observer: F) -> Result<SolveResult>
where
    F: FnMut(usize, &[f64]),
{
    thresholded_gradient(problem, config, Shrink::Soft(config.dst_beta), &mut observer)
}

/// `min ‖x̂_lin − Γt‖₂` subject to `‖t‖₁ ≤ ϱ`, by projected gradient with a
/// backtracking line search on `½‖x̂_lin − Γt‖²`.
pub fn nlcd_lasso(problem: &DemixProblem, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let start = Instant::now();
    let dict = problem.dictionary();
    let n = problem.dim();
    let radius = config
        .lasso_radius
        .unwrap_or(2.0 * (problem.sparsity() as f64).sqrt());
    if problem.sparsity() == 0 || radius == 0.0 {
        return Ok(finish(problem, ConstituentVector::zeros(n), Vec::new(), true));
    }
    let x_lin = problem.linear_estimate();

    let half_sq = |t: &[f64]| -> Result<(f64, Vec<f64>)> {
        let mut r = dict.apply(t)?;
        r.iter_mut().zip(&x_lin).for_each(|(ri, xi)| *ri = xi - *ri);
        Ok((0.5 * r.iter().map(|v| v * v).sum::<f64>(), r))
    };

    let mut t = vec![0.0; 2 * n];
    let (mut f, mut resid) = half_sq(&t)?;
    // ‖Γ‖² = 2, so 1/2 always passes the test; start above it and halve.
    let mut alpha = 1.0;
    let mut trace = Vec::new();
    let mut converged = false;
    for iter in 1..=config.max_iters {
        let grad: Vec<f64> = dict.adjoint(&resid)?.iter().map(|g| -g).collect();
        let mut halvings = 0;
        let (t_next, f_next, r_next) = loop {
            let trial: Vec<f64> = t.iter().zip(&grad).map(|(a, g)| a - alpha * g).collect();
            let proj = project_l1_ball(&trial, radius)?;
            let (f_new, r_new) = half_sq(&proj)?;
            let (lin, sq) = proj
                .iter()
                .zip(&t)
                .zip(&grad)
                .fold((0.0, 0.0), |(lin, sq), ((p, ti), g)| {
                    let d = p - ti;
                    (lin + g * d, sq + d * d)
                });
            if f_new <= f + lin + sq / (2.0 * alpha) + 1e-15 * f.max(1.0) || halvings >= MAX_HALVINGS {
                break (proj, f_new, r_new);
            }
            alpha *= 0.5;
            halvings += 1;
        };
        if !f_next.is_finite() {
            return Err(DemixError::NonFinite {
                quantity: "objective",
                iteration: iter,
            });
        }
        let step_norm = t
            .iter()
            .zip(&t_next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let t_norm = l2_norm(&t);
        let f_prev = f;
        t = t_next;
        f = f_next;
        resid = r_next;
        trace.push(TraceRecord {
            iter,
            loss: Some((2.0 * f).sqrt()),
            step_norm,
            step_size: alpha,
            support: l0_norm(&t),
            elapsed_ms: elapsed_ms(&start),
        });
        if (f_prev - f).abs() <= config.rel_tol * f_prev.max(1e-300)
            || step_norm <= config.rel_tol * t_norm.max(1.0)
        {
            converged = true;
            break;
        }
    }
    Ok(finish(problem, ConstituentVector::from_vec(t)?, trace, converged))
}
