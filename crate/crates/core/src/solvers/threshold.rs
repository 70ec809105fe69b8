//! Sparse projections and shrinkage operators.

use std::cmp::Ordering;

use crate::error::{DemixError, Result};

/// Orders indices by decreasing magnitude, lower index first among ties.
fn by_magnitude(v: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b))
}

/// Indices of the `k` largest-magnitude entries, in increasing index order.
pub fn top_k_support(v: &[f64], k: usize) -> Vec<usize> {
    if k >= v.len() {
        return (0..v.len()).collect();
    }
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.select_nth_unstable_by(k - 1, by_magnitude(v));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Keeps the `k` largest-magnitude entries of `v` and zeroes the rest.
pub fn hard_threshold(v: &[f64], k: usize) -> Vec<f64> {
    if k >= v.len() {
        return v.to_vec();
    }
    let mut out = vec![0.0; v.len()];
    for i in top_k_support(v, k) {
        out[i] = v[i];
    }
    out
}

pub(crate) fn hard_threshold_in_place(v: &mut [f64], k: usize) {
    if k >= v.len() {
        return;
    }
    let keep = top_k_support(v, k);
    let mut next = keep.into_iter().peekable();
    for (i, x) in v.iter_mut().enumerate() {
        if next.peek() == Some(&i) {
            next.next();
        } else {
            *x = 0.0;
        }
    }
}

/// Elementwise `sign(v) · max(|v| − λ, 0)`.
pub fn soft_threshold(v: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    soft_threshold_in_place(&mut out, lambda)?;
    Ok(out)
}

pub(crate) fn soft_threshold_in_place(v: &mut [f64], lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) {
        return Err(DemixError::InvalidArgument(format!(
            "soft threshold needs lambda >= 0, got {lambda}"
        )));
    }
    for x in v.iter_mut() {
        *x = if *x > lambda {
            *x - lambda
        } else if *x < -lambda {
            *x + lambda
        } else {
            0.0
        };
    }
    Ok(())
}

/// Euclidean projection onto `{u : ‖u‖₁ ≤ r}`.
///
/// Uses the sort-based threshold search: with magnitudes sorted in decreasing
/// order `μ₁ ≥ μ₂ ≥ …`, the threshold is `θ = (Σ_{j≤ρ} μ_j − r)/ρ` where `ρ` is
/// the largest index with `μ_ρ > (Σ_{j≤ρ} μ_j − r)/ρ`.
pub fn project_l1_ball(v: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(DemixError::InvalidArgument(format!(
            "l1 ball radius must be positive, got {r}"
        )));
    }
    let norm: f64 = v.iter().map(|x| x.abs()).sum();
    if norm <= r {
        return Ok(v.to_vec());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &mu) in mags.iter().enumerate() {
        cumsum += mu;
        let candidate = (cumsum - r) / (j + 1) as f64;
        if mu > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    soft_threshold(v, theta.max(0.0))
}

pub fn l0_norm(v: &[f64]) -> usize {
    v.iter().filter(|&&x| x != 0.0).count()
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
