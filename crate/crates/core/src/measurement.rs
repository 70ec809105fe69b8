//! Random measurement ensembles and the nonlinear observation model
//! `y = g(Ax) + e`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, DemixError, Result};
use crate::links::Link;
use crate::par::{self, Execution};
use crate::rng::{self, derive_seed, stream};
use crate::transforms::{Basis, BasisKind};

/// Below this many matrix entries dense products stay on the calling thread.
const PARALLEL_MIN_ENTRIES: usize = 1 << 20;
const COLUMN_BLOCK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleKind {
    #[serde(rename = "gaussian")]
    Gaussian,
    #[serde(rename = "rademacher")]
    Rademacher,
    /// `√n · S C D`: random signs `D`, orthonormal DCT-II `C`, row selection `S`.
    #[serde(rename = "subfast")]
    SubsampledFast,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Rademacher => "rademacher",
            EnsembleKind::SubsampledFast => "subfast",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "rademacher" => Ok(EnsembleKind::Rademacher),
            "subfast" => Ok(EnsembleKind::SubsampledFast),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown ensemble `{other}` (expected gaussian, rademacher or subfast)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    /// Row-major `m × n`.
    Dense(Vec<f64>),
    Subsampled {
        rows: Vec<usize>,
        signs: Vec<f64>,
        transform: Basis,
    },
}

/// An `m × n` measurement matrix, applied matrix-free where possible.
#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    kind: EnsembleKind,
    m: usize,
    n: usize,
    seed: u64,
    exec: Execution,
    repr: Repr,
}

impl MeasurementOperator {
    /// Draws an operator; the result depends only on `(kind, m, n, seed)`.
    ///
    /// Dense ensembles draw row `i` from its own stream so generation can be
    /// split across workers without changing the matrix.
    pub fn sample(kind: EnsembleKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(DemixError::InvalidArgument(format!(
                "measurement dimensions must be positive, got {m}x{n}"
            )));
        }
        let exec = Execution::Parallel;
        let repr = match kind {
            EnsembleKind::Gaussian | EnsembleKind::Rademacher => {
                let mut data = vec![0.0; m * n];
                let row_exec = if m * n >= PARALLEL_MIN_ENTRIES {
                    exec
                } else {
                    Execution::Sequential
                };
                par::for_each_chunk_mut(row_exec, &mut data, n, |i, row| {
                    let mut r = rng::rng_from_seed(derive_seed(seed, &[stream::ROW, i as u64]));
                    if kind == EnsembleKind::Gaussian {
                        row.iter_mut().for_each(|v| *v = rng::standard_normal(&mut r));
                    } else {
                        row.iter_mut()
                            .for_each(|v| *v = if r.random::<bool>() { 1.0 } else { -1.0 });
                    }
                });
                Repr::Dense(data)
            }
            EnsembleKind::SubsampledFast => {
                if m > n {
                    return Err(DemixError::InvalidArgument(format!(
                        "subsampled operator needs m <= n, got m={m}, n={n}"
                    )));
                }
                let mut r = rng::rng_from_seed(derive_seed(seed, &[stream::OPERATOR]));
                let signs = (0..n)
                    .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                let mut rows = index::sample(&mut r, n, m).into_vec();
                rows.sort_unstable();
                Repr::Subsampled {
                    rows,
                    signs,
                    transform: Basis::new(BasisKind::Dct, n)?,
                }
            }
        };
        Ok(MeasurementOperator {
            kind,
            m,
            n,
            seed,
            exec,
            repr,
        })
    }

    /// Wraps an explicit row-major matrix (reported as a Gaussian-kind operator).
    pub fn from_dense(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense operator", m * n, data.len())?;
        if m == 0 || n == 0 {
            return Err(DemixError::InvalidArgument("empty operator".into()));
        }
        Ok(MeasurementOperator {
            kind: EnsembleKind::Gaussian,
            m,
            n,
            seed: 0,
            exec: Execution::Parallel,
            repr: Repr::Dense(data),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Scales every entry by `c` (dense operators only).
    pub fn scaled(mut self, c: f64) -> Result<Self> {
        match &mut self.repr {
            Repr::Dense(d) => {
                d.iter_mut().for_each(|v| *v *= c);
                Ok(self)
            }
            Repr::Subsampled { .. } => Err(DemixError::InvalidArgument(
                "only dense operators can be rescaled".into(),
            )),
        }
    }

    /// `Ax`.
    pub fn measure(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("measure", self.n, x.len())?;
        let mut out = vec![0.0; self.m];
        self.measure_into(x, &mut out);
        Ok(out)
    }

    /// `Aᵀv`.
    pub fn measure_adjoint(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("measure adjoint", self.m, v.len())?;
        let mut out = vec![0.0; self.n];
        self.adjoint_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn measure_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        match &self.repr {
            Repr::Dense(a) => {
                let exec = self.dense_exec();
                par::for_each_chunk_mut(exec, out, 64, |ci, chunk| {
                    for (k, o) in chunk.iter_mut().enumerate() {
                        let i = ci * 64 + k;
                        *o = dot(&a[i * n..(i + 1) * n], x);
                    }
                });
            }
            Repr::Subsampled {
                rows,
                signs,
                transform,
            } => {
                let mut buf: Vec<f64> = x.iter().zip(signs).map(|(a, b)| a * b).collect();
                transform.adjoint_in_place(&mut buf);
                let scale = (n as f64).sqrt();
                out.iter_mut()
                    .zip(rows)
                    .for_each(|(o, &r)| *o = scale * buf[r]);
            }
        }
    }

    pub(crate) fn adjoint_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        match &self.repr {
            Repr::Dense(a) => {
                let exec = self.dense_exec();
                // Column blocks keep each output entry's summation order fixed.
                par::for_each_chunk_mut(exec, out, COLUMN_BLOCK, |bi, block| {
                    let c0 = bi * COLUMN_BLOCK;
                    block.iter_mut().for_each(|o| *o = 0.0);
                    for (i, &vi) in v.iter().enumerate() {
                        if vi == 0.0 {
                            continue;
                        }
                        let row = &a[i * n + c0..i * n + c0 + block.len()];
                        block.iter_mut().zip(row).for_each(|(o, r)| *o += vi * r);
                    }
                });
            }
            Repr::Subsampled {
                rows,
                signs,
                transform,
            } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let scale = (n as f64).sqrt();
                for (&r, &vi) in rows.iter().zip(v) {
                    out[r] = scale * vi;
                }
                transform.apply_in_place(out);
                out.iter_mut().zip(signs).for_each(|(o, s)| *o *= s);
            }
        }
    }

    /// Row `i` as a vector of length `n`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(a) => a[i * self.n..(i + 1) * self.n].to_vec(),
            Repr::Subsampled { .. } => {
                let mut e = vec![0.0; self.m];
                e[i] = 1.0;
                let mut out = vec![0.0; self.n];
                self.adjoint_into(&e, &mut out);
                out
            }
        }
    }

    /// Row-major dense materialisation.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Dense(a) => a.clone(),
            Repr::Subsampled { .. } => (0..self.m).flat_map(|i| self.row(i)).collect(),
        }
    }

    fn dense_exec(&self) -> Execution {
        if self.m * self.n >= PARALLEL_MIN_ENTRIES {
            self.exec
        } else {
            Execution::Sequential
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorise without reassociating.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    None,
    Gaussian,
}

/// Additive noise `e_i ~ N(0, τ²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub tau: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec::default()
    }

    pub fn gaussian(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(DemixError::InvalidArgument(format!(
                "noise level must be non-negative, got {tau}"
            )));
        }
        Ok(NoiseSpec {
            kind: if tau > 0.0 {
                NoiseKind::Gaussian
            } else {
                NoiseKind::None
            },
            tau,
        })
    }

    pub fn is_silent(&self) -> bool {
        self.kind == NoiseKind::None || self.tau == 0.0
    }
}

/// `y_i = g((Ax)_i) + e_i`, with the noise drawn from `seed`.
pub fn observe(
    op: &MeasurementOperator,
    link: &Link,
    x: &[f64],
    noise: NoiseSpec,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut y = op.measure(x)?;
    y.iter_mut().for_each(|u| *u = link.eval(*u));
    if !noise.is_silent() {
        let mut r = rng::rng_from_seed(derive_seed(seed, &[stream::NOISE]));
        y.iter_mut()
            .for_each(|v| *v += noise.tau * rng::standard_normal(&mut r));
    }
    Ok(y)
}
