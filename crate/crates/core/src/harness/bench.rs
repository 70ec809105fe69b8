use serde::Serialize;

use super::trial::{run_trial, TrialSpec};
use crate::error::Result;
use crate::links::LinkKind;
use crate::measurement::EnsembleKind;
use crate::solvers::Algorithm;

pub const BENCH_REPEATS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub ensemble: EnsembleKind,
    pub link: LinkKind,
    pub median_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

/// Solver wall time (signal and operator generation excluded) over `repeats`
/// runs of each spec, run one after another on the calling thread.
pub fn run_benchmark(specs: &[TrialSpec], repeats: usize) -> Result<Vec<BenchRow>> {
    let repeats = repeats.max(1);
    specs
        .iter()
        .map(|spec| {
            let mut times = (0..repeats)
                .map(|_| run_trial(spec).map(|r| r.time_ms))
                .collect::<Result<Vec<f64>>>()?;
            times.sort_by(f64::total_cmp);
            Ok(BenchRow {
                algorithm: spec.algorithm,
                n: spec.n,
                s: spec.s,
                m: spec.m,
                ensemble: spec.ensemble,
                link: spec.link,
                median_ms: median(&times),
                min_ms: times[0],
                max_ms: times[times.len() - 1],
            })
        })
        .collect()
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}
