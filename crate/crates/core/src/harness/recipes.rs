//! Named experiment presets at desk scale (`n = 4096`).

use super::trial::TrialSpec;
use crate::error::{DemixError, Result};
use crate::links::LinkKind;
use crate::measurement::EnsembleKind;
use crate::solvers::Algorithm;

#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub base: TrialSpec,
    pub s_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub trials: usize,
}

pub const RECIPE_NAMES: [&str; 4] = ["sign-sweep", "grid-linsin", "msweep-linsin", "msweep-logistic"];

/// Sparsity and measurement axes of the `grid-linsin` phase diagram.
pub const GRID_S: [usize; 8] = [4, 8, 12, 16, 20, 24, 28, 32];
pub const GRID_M: [usize; 8] = [100, 200, 300, 400, 600, 800, 1000, 1200];

/// Presets:
///
/// * `sign-sweep`: OneShot, sign link, Gaussian `A`, `s = 5`, `m ∈ {500, 1000, 2000}`.
/// * `grid-linsin`: 8×8 `(s, m)` phase diagram with `g(u) = 2u + sin u` and a
///   subsampled fast operator; 0.99 cosine threshold.
/// * `msweep-linsin` / `msweep-logistic`: `s = 50`, `m` swept upward, 0.95
///   cosine threshold.
///
/// The algorithm defaults to the one each preset is usually run with and can
/// be overridden on the command line.
pub fn recipe(name: &str) -> Result<Recipe> {
    let base = TrialSpec {
        n: 4096,
        ..TrialSpec::default()
    };
    match name {
        "sign-sweep" => Ok(Recipe {
            base: TrialSpec {
                s: 5,
                link: LinkKind::Sign,
                ensemble: EnsembleKind::Gaussian,
                algorithm: Algorithm::OneShot,
                success_threshold: 0.9,
                ..base
            },
            s_values: vec![5],
            m_values: vec![500, 1000, 2000],
            trials: 20,
        }),
        "grid-linsin" => Ok(Recipe {
            base: TrialSpec {
                link: LinkKind::LinearSine,
                ensemble: EnsembleKind::SubsampledFast,
                algorithm: Algorithm::Dht,
                ..base
            },
            s_values: GRID_S.to_vec(),
            m_values: GRID_M.to_vec(),
            trials: 10,
        }),
        "msweep-linsin" | "msweep-logistic" => Ok(Recipe {
            base: TrialSpec {
                s: 50,
                link: if name == "msweep-linsin" {
                    LinkKind::LinearSine
                } else {
                    LinkKind::Logistic
                },
                ensemble: EnsembleKind::SubsampledFast,
                algorithm: Algorithm::Dht,
                success_threshold: 0.95,
                ..base
            },
            s_values: vec![50],
            m_values: vec![500, 1000, 1500, 2000, 2500, 3000, 3500, 4000],
            trials: 20,
        }),
        other => Err(DemixError::InvalidArgument(format!(
            "unknown recipe `{other}` (expected one of {})",
            RECIPE_NAMES.join(", ")
        ))),
    }
}
