use serde::{Deserialize, Serialize};

use super::trial::{run_trial, TrialSpec};
use crate::error::{DemixError, Result};
use crate::par::{self, Execution};
use crate::rng::derive_seed;

/// Seed of trial `trial` in the cell `(s, m)` of a grid seeded with `base`.
///
/// Keyed on the cell's coordinates rather than its position, so extending a
/// grid leaves every existing cell's trials untouched.
pub fn trial_seed(base: u64, s: usize, m: usize, trial: usize) -> u64 {
    derive_seed(base, &[s as u64, m as u64, trial as u64])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub s: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub prob: f64,
}

/// Empirical success probabilities over an `(s, m)` grid, stored row-major in
/// `s` (cells for one `s` are contiguous, in `m_values` order).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    pub s_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub cells: Vec<PhaseCell>,
    /// Mean cosine similarity per cell, same order as `cells`.
    pub mean_cosine: Vec<f64>,
}

impl PhaseGrid {
    pub fn cell(&self, s_idx: usize, m_idx: usize) -> &PhaseCell {
        &self.cells[s_idx * self.m_values.len() + m_idx]
    }

    /// Success probability averaged over `s`, one entry per `m`.
    pub fn column_means(&self) -> Vec<f64> {
        let rows = self.s_values.len() as f64;
        (0..self.m_values.len())
            .map(|j| {
                (0..self.s_values.len())
                    .map(|i| self.cell(i, j).prob)
                    .sum::<f64>()
                    / rows
            })
            .collect()
    }

    pub fn mean_probability(&self) -> f64 {
        self.cells.iter().map(|c| c.prob).sum::<f64>() / self.cells.len() as f64
    }
}

/// Runs `trials` seeded trials for every `(s, m)` pair, all other settings
/// taken from `base`. Trials are independent tasks and may run in parallel;
/// the result does not depend on scheduling.
pub fn run_phase_grid(
    s_values: &[usize],
    m_values: &[usize],
    trials: usize,
    base: &TrialSpec,
    exec: Execution,
) -> Result<PhaseGrid> {
    if s_values.is_empty() || m_values.is_empty() {
        return Err(DemixError::InvalidArgument("phase grid is empty".into()));
    }
    if trials == 0 {
        return Err(DemixError::InvalidArgument(
            "phase grid needs at least one trial per cell".into(),
        ));
    }
    let specs: Vec<TrialSpec> = s_values
        .iter()
        .flat_map(|&s| m_values.iter().map(move |&m| (s, m)))
        .flat_map(|(s, m)| {
            (0..trials).map(move |k| TrialSpec {
                s,
                m,
                seed: trial_seed(base.seed, s, m, k),
                ..base.clone()
            })
        })
        .collect();
    // Fail fast on configuration errors before launching the batch.
    for spec in specs.iter().step_by(trials) {
        spec.validate()?;
    }
    let outcomes = par::map_indexed(exec, specs.len(), |i| {
        run_trial(&specs[i]).map(|r| (r.success, r.cosine))
    });

    let mut cells = Vec::with_capacity(s_values.len() * m_values.len());
    let mut mean_cosine = Vec::with_capacity(cells.capacity());
    for (c, chunk) in outcomes.chunks(trials).enumerate() {
        let (mut successes, mut cos_sum) = (0usize, 0.0);
        for o in chunk {
            let (ok, cos) = o.as_ref().map_err(|e| DemixError::InvalidArgument(e.to_string()))?;
            successes += usize::from(*ok);
            cos_sum += cos;
        }
        cells.push(PhaseCell {
            s: s_values[c / m_values.len()],
            m: m_values[c % m_values.len()],
            trials,
            successes,
            prob: successes as f64 / trials as f64,
        });
        mean_cosine.push(cos_sum / trials as f64);
    }
    Ok(PhaseGrid {
        s_values: s_values.to_vec(),
        m_values: m_values.to_vec(),
        trials,
        cells,
        mean_cosine,
    })
}
