use rand::seq::index;
use rand::Rng;

use crate::error::{DemixError, Result};
use crate::rng::{self, derive_seed, stream};
use crate::transforms::{ConstituentVector, Dictionary};

/// Ground truth for one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl Signal {
    pub fn t(&self) -> ConstituentVector {
        ConstituentVector::from_parts(&self.w, &self.z).expect("equal halves")
    }
}

/// Draws `w` and `z` with `s` entries of ±1 on independent uniform supports
/// and forms `x = Φw + Ψz`.
pub fn generate_signal(dict: &Dictionary, s: usize, seed: u64) -> Result<Signal> {
    let n = dict.dim();
    if s > n {
        return Err(DemixError::InvalidArgument(format!(
            "sparsity {s} exceeds dimension {n}"
        )));
    }
    let mut r = rng::rng_from_seed(derive_seed(seed, &[stream::SIGNAL]));
    let mut draw = || {
        let mut v = vec![0.0; n];
        for i in index::sample(&mut r, n, s) {
            v[i] = if r.random::<bool>() { 1.0 } else { -1.0 };
        }
        v
    };
    let w = draw();
    let z = draw();
    let x = dict.apply(&ConstituentVector::from_parts(&w, &z)?)?;
    Ok(Signal { w, z, x })
}
