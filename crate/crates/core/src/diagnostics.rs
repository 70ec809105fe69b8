//! Scale-free quality metrics, coherence quantities, the linear-estimator
//! constants of a link, and sampled restricted-curvature bounds.

use rand::seq::index;
use serde::Serialize;

use crate::error::{DemixError, Result};
use crate::links::Link;
use crate::measurement::{dot, MeasurementOperator};
use crate::par::{self, Execution};
use crate::rng::{self, derive_seed, stream};
use crate::solvers::{top_k_support, DemixProblem};
use crate::transforms::Dictionary;

const POWER_STEPS: usize = 200;
const POWER_TOL: f64 = 1e-8;

/// `xᵀx̂ / (‖x‖‖x̂‖)`.
pub fn cosine_similarity(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    crate::error::check_len("cosine similarity", x.len(), x_hat.len())?;
    let nx = dot(x, x).sqrt();
    let ny = dot(x_hat, x_hat).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return Err(DemixError::InvalidArgument(
            "cosine similarity of a zero vector".into(),
        ));
    }
    Ok((dot(x, x_hat) / (nx * ny)).clamp(-1.0, 1.0))
}

/// Like [`cosine_similarity`] but scoring a zero estimate as 0.
pub fn cosine_or_zero(x: &[f64], x_hat: &[f64]) -> f64 {
    cosine_similarity(x, x_hat).unwrap_or(0.0)
}

/// `γ = max_{i≠j} |(ΓᵀΓ)_{ij}|`.
///
/// Both blocks `ΦᵀΦ` and `ΨᵀΨ` are identities, so only the cross block
/// `ΦᵀΨ` contributes; it is formed one column at a time with fast transforms.
pub fn mutual_coherence(dict: &Dictionary) -> f64 {
    let n = dict.dim();
    let col_max = par::map_indexed(Execution::Parallel, n, |j| {
        let mut col = vec![0.0; n];
        col[j] = 1.0;
        dict.psi().apply_in_place(&mut col);
        dict.phi().adjoint_in_place(&mut col);
        col.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    });
    col_max.into_iter().fold(0.0, f64::max)
}

/// `ϑ = max_{i,j} |a_iᵀΓ_j| / ‖a_i‖₂`.
pub fn cross_coherence(op: &MeasurementOperator, dict: &Dictionary) -> Result<f64> {
    crate::error::check_len("cross coherence", op.cols(), dict.dim())?;
    let per_row = par::map_indexed(Execution::Parallel, op.rows(), |i| {
        let row = op.row(i);
        let norm = dot(&row, &row).sqrt();
        if norm == 0.0 {
            return Err(DemixError::InvalidArgument(format!(
                "measurement row {i} is zero"
            )));
        }
        let proj = dict.adjoint(&row)?;
        Ok(proj.iter().fold(0.0f64, |a, v| a.max(v.abs())) / norm)
    });
    per_row
        .into_iter()
        .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub gamma: f64,
    /// `s·γ`, an upper bound on the incoherence `ε`.
    pub epsilon_bound: f64,
    pub vartheta: Option<f64>,
}

pub fn coherence_report(
    dict: &Dictionary,
    sparsity: usize,
    op: Option<&MeasurementOperator>,
) -> Result<CoherenceReport> {
    let gamma = mutual_coherence(dict);
    let vartheta = op.map(|a| cross_coherence(a, dict)).transpose()?;
    Ok(CoherenceReport {
        gamma,
        epsilon_bound: sparsity as f64 * gamma,
        vartheta,
    })
}

/// Monte-Carlo estimates of `μ = E[y·g]`, `σ² = Var(y·g)` and `η² = E[y²]`
/// for `y = g(ξ)`, `ξ ~ N(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkConstants {
    pub mu: f64,
    pub sigma2: f64,
    pub eta2: f64,
    pub trials: usize,
}

pub fn link_constants(link: &Link, trials: usize, seed: u64) -> Result<LinkConstants> {
    if trials < 2 {
        return Err(DemixError::InvalidArgument(
            "link constants need at least two samples".into(),
        ));
    }
    let mut r = rng::rng_from_seed(derive_seed(seed, &[stream::DIAGNOSTICS]));
    let (mut s1, mut s2, mut sy2) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        let g = rng::standard_normal(&mut r);
        let y = link.eval(g);
        let p = y * g;
        s1 += p;
        s2 += p * p;
        sy2 += y * y;
    }
    let t = trials as f64;
    let mu = s1 / t;
    let sigma2 = (s2 - t * mu * mu) / (t - 1.0);
    Ok(LinkConstants {
        mu,
        sigma2,
        eta2: sy2 / t,
        trials,
    })
}

/// Extreme restricted-Hessian eigenvalues over the sampled supports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RscRssEstimate {
    /// Smallest eigenvalue found (`m̂`).
    pub m_lower: f64,
    /// Largest eigenvalue found (`M̂`).
    pub m_upper: f64,
    pub supports_probed: usize,
    pub sparsity_level: usize,
}

impl RscRssEstimate {
    pub fn condition(&self) -> f64 {
        self.m_upper / self.m_lower
    }

    /// `q = √(1 + η²M̂² − 2ηm̂)`.
    pub fn contraction_factor(&self, step: f64) -> f64 {
        (1.0 + step * step * self.m_upper * self.m_upper - 2.0 * step * self.m_lower)
            .max(0.0)
            .sqrt()
    }
}

/// Samples `num_supports` index sets of size `sparsity`, each containing the
/// largest entries of `t_ref` and filled up at random, and returns the running
/// min/max eigenvalue of the Hessian of the loss restricted to them.
///
/// Being sampled, `m_upper` can only underestimate the true supremum and
/// `m_lower` only overestimate the true infimum.
pub fn estimate_rsc_rss(
    problem: &DemixProblem,
    t_ref: &[f64],
    sparsity: usize,
    num_supports: usize,
    seed: u64,
) -> Result<RscRssEstimate> {
    problem.link().require_derivative()?;
    let two_n = 2 * problem.dim();
    crate::error::check_len("curvature reference point", two_n, t_ref.len())?;
    if sparsity == 0 || sparsity > two_n {
        return Err(DemixError::InvalidArgument(format!(
            "support size must be in 1..={two_n}, got {sparsity}"
        )));
    }
    if num_supports == 0 {
        return Err(DemixError::InvalidArgument("need at least one support".into()));
    }
    let anchored: Vec<usize> = top_k_support(t_ref, sparsity)
        .into_iter()
        .filter(|&j| t_ref[j] != 0.0)
        .collect();
    let probes = par::map_indexed(Execution::Parallel, num_supports, |p| {
        let support = sample_support(&anchored, two_n, sparsity, derive_seed(seed, &[stream::DIAGNOSTICS, p as u64]));
        let h = problem.restricted_hessian(t_ref, &support)?;
        Ok::<_, DemixError>(extreme_eigenvalues(&h, sparsity))
    });
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for probe in probes {
        let (a, b) = probe?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok(RscRssEstimate {
        m_lower: lo.max(0.0).min(hi),
        m_upper: hi,
        supports_probed: num_supports,
        sparsity_level: sparsity,
    })
}

fn sample_support(anchored: &[usize], two_n: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut taken = vec![false; two_n];
    let mut support: Vec<usize> = anchored.to_vec();
    support.iter().for_each(|&j| taken[j] = true);
    let mut r = rng::rng_from_seed(seed);
    let free: Vec<usize> = (0..two_n).filter(|&j| !taken[j]).collect();
    let need = size - support.len();
    support.extend(index::sample(&mut r, free.len(), need).into_iter().map(|k| free[k]));
    support.sort_unstable();
    support
}

/// `(λ_min, λ_max)` of a symmetric positive semidefinite `k × k` matrix:
/// power iteration for the top, shifted inverse iteration for the bottom.
pub fn extreme_eigenvalues(h: &[f64], k: usize) -> (f64, f64) {
    let lmax = power_iteration(h, k);
    let lmin = inverse_iteration(h, k, lmax);
    (lmin.min(lmax), lmax)
}

fn matvec(h: &[f64], k: usize, v: &[f64], out: &mut [f64]) {
    for i in 0..k {
        out[i] = dot(&h[i * k..(i + 1) * k], v);
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn start_vector(k: usize) -> Vec<f64> {
    // Deterministic and not orthogonal to any coordinate direction.
    let mut v: Vec<f64> = (0..k).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).fract()).collect();
    normalize(&mut v);
    v
}

fn power_iteration(h: &[f64], k: usize) -> f64 {
    let mut v = start_vector(k);
    let mut w = vec![0.0; k];
    let mut lambda = 0.0;
    let mut resid = 0.0;
    for _ in 0..POWER_STEPS {
        matvec(h, k, &v, &mut w);
        lambda = dot(&v, &w);
        resid = residual(&w, &v, lambda);
        if normalize(&mut w) == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut v, &mut w);
        if resid <= POWER_TOL * lambda.abs() {
            return lambda;
        }
    }
    // Slow convergence (nearly equal top eigenvalues). The residual puts
    // λ_max below λ + resid, so σI − H with σ = λ + 2·resid is positive
    // definite and inverse iteration on it converges quickly.
    let sigma = lambda + 2.0 * resid;
    let flipped: Vec<f64> = h.iter().map(|x| -x).collect();
    let Some(l) = cholesky(&flipped, k, sigma) else {
        return lambda;
    };
    for _ in 0..POWER_STEPS {
        cholesky_solve(&l, k, &mut v);
        normalize(&mut v);
        matvec(h, k, &v, &mut w);
        lambda = dot(&v, &w);
        if residual(&w, &v, lambda) <= POWER_TOL * lambda.abs() {
            break;
        }
    }
    lambda
}

/// `‖Hv − ρv‖₂`, which bounds the distance from `ρ` to the spectrum of a
/// symmetric `H` when `v` is a unit vector.
fn residual(hv: &[f64], v: &[f64], rho: f64) -> f64 {
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - rho * b) * (a - rho * b))
        .sum::<f64>()
        .sqrt()
}

/// Lower Cholesky factor of `h + shift·I`, or `None` if not positive definite.
fn cholesky(h: &[f64], k: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut sum = h[i * k + j] + if i == j { shift } else { 0.0 };
            for p in 0..j {
                sum -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * k + i] = sum.sqrt();
            } else {
                l[i * k + j] = sum / l[j * k + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let s = b[i] - dot(&l[i * k..i * k + i], &b[..i]);
        b[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for p in i + 1..k {
            s -= l[p * k + i] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
}

fn inverse_iteration(h: &[f64], k: usize, lmax: f64) -> f64 {
    if lmax <= 0.0 {
        return 0.0;
    }
    // A small positive shift keeps the factorisation defined for PSD input.
    let mut shift = 1e-12 * lmax;
    let l = loop {
        match cholesky(h, k, shift) {
            Some(l) => break l,
            None if shift < lmax => shift *= 10.0,
            None => return 0.0,
        }
    };
    let mut v = start_vector(k);
    let mut hv = vec![0.0; k];
    let mut rayleigh = 0.0;
    for _ in 0..POWER_STEPS {
        cholesky_solve(&l, k, &mut v);
        normalize(&mut v);
        matvec(h, k, &v, &mut hv);
        rayleigh = dot(&v, &hv);
        if residual(&hv, &v, rayleigh) <= POWER_TOL * lmax {
            break;
        }
    }
    rayleigh.max(0.0)
}
