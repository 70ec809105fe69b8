//! Orthonormal bases on R^n and the two-basis dictionary `[Φ Ψ]`.
//!
//! `apply` is synthesis (coefficients to signal, `Φ c`) and `adjoint` is
//! analysis (`Φᵀ x`). The DCT is the orthonormal DCT-II whose first atom is the
//! constant `1/√n`; Haar is the full orthonormal cascade with coefficients laid
//! out coarse to fine.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, DemixError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Identity,
    Dct,
    Haar,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Identity => "identity",
            BasisKind::Dct => "dct",
            BasisKind::Haar => "haar",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "id" => Ok(BasisKind::Identity),
            "dct" => Ok(BasisKind::Dct),
            "haar" => Ok(BasisKind::Haar),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown basis `{other}` (expected identity, dct or haar)"
            ))),
        }
    }
}

/// An orthonormal basis of R^n with fast synthesis and analysis.
#[derive(Clone)]
pub struct Basis {
    kind: BasisKind,
    n: usize,
    dct: Option<Arc<dyn TransformType2And3<f64>>>,
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Basis")
            .field("kind", &self.kind)
            .field("n", &self.n)
            .finish()
    }
}

impl Basis {
    pub fn new(kind: BasisKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(DemixError::InvalidArgument("basis dimension must be positive".into()));
        }
        if kind == BasisKind::Haar && !n.is_power_of_two() {
            return Err(DemixError::NotPowerOfTwo(n));
        }
        let dct = (kind == BasisKind::Dct).then(|| DctPlanner::new().plan_dct2(n));
        Ok(Basis { kind, n, dct })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Φ c`.
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len("basis apply", self.n, coeffs.len())?;
        let mut out = coeffs.to_vec();
        self.apply_in_place(&mut out);
        Ok(out)
    }

    /// `Φᵀ x`.
    pub fn adjoint(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("basis adjoint", self.n, x.len())?;
        let mut out = x.to_vec();
        self.adjoint_in_place(&mut out);
        Ok(out)
    }

    /// In-place synthesis; `buf.len()` must equal the basis dimension.
    pub fn apply_in_place(&self, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.n);
        match self.kind {
            BasisKind::Identity => {}
            BasisKind::Dct => self.dct_synthesis(buf),
            BasisKind::Haar => haar_synthesis(buf),
        }
    }

    /// In-place analysis; `buf.len()` must equal the basis dimension.
    pub fn adjoint_in_place(&self, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.n);
        match self.kind {
            BasisKind::Identity => {}
            BasisKind::Dct => self.dct_analysis(buf),
            BasisKind::Haar => haar_analysis(buf),
        }
    }

    /// Dense `n × n` matrix, row-major, built column by column from `apply`.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut mat = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.apply_in_place(&mut col);
            for (i, v) in col.iter().enumerate() {
                mat[i * n + j] = *v;
            }
        }
        mat
    }

    fn dct_synthesis(&self, buf: &mut [f64]) {
        let n = self.n as f64;
        // DCT-III computes x_j = X_0/2 + Σ_{k≥1} X_k cos(π(j+½)k/n).
        buf[0] *= 2.0 * (1.0 / n).sqrt();
        let s = (2.0 / n).sqrt();
        buf[1..].iter_mut().for_each(|v| *v *= s);
        self.dct.as_ref().expect("dct plan").process_dct3(buf);
    }

    fn dct_analysis(&self, buf: &mut [f64]) {
        let n = self.n as f64;
        self.dct.as_ref().expect("dct plan").process_dct2(buf);
        buf[0] *= (1.0 / n).sqrt();
        let s = (2.0 / n).sqrt();
        buf[1..].iter_mut().for_each(|v| *v *= s);
    }
}

/// Orthonormal Haar analysis by lifting: predict, update, normalise, repeated
/// on the approximation band.
fn haar_analysis(buf: &mut [f64]) {
    let mut len = buf.len();
    let mut tmp = vec![0.0; len];
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let even = buf[2 * i];
            let odd = buf[2 * i + 1];
            let d = odd - even;
            let a = even + 0.5 * d;
            tmp[i] = a * std::f64::consts::SQRT_2;
            tmp[half + i] = -d * std::f64::consts::FRAC_1_SQRT_2;
        }
        buf[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
}

fn haar_synthesis(buf: &mut [f64]) {
    let n = buf.len();
    let mut tmp = vec![0.0; n];
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for i in 0..half {
            let a = buf[i] * std::f64::consts::FRAC_1_SQRT_2;
            let d = -buf[half + i] * std::f64::consts::SQRT_2;
            let even = a - 0.5 * d;
            tmp[2 * i] = even;
            tmp[2 * i + 1] = even + d;
        }
        buf[..len].copy_from_slice(&tmp[..len]);
        len *= 2;
    }
}

/// A stacked coefficient vector `t = [w; z]` of length `2n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstituentVector(Vec<f64>);

impl ConstituentVector {
    pub fn zeros(n: usize) -> Self {
        ConstituentVector(vec![0.0; 2 * n])
    }

    pub fn from_parts(w: &[f64], z: &[f64]) -> Result<Self> {
        check_len("constituent parts", w.len(), z.len())?;
        let mut t = Vec::with_capacity(2 * w.len());
        t.extend_from_slice(w);
        t.extend_from_slice(z);
        Ok(ConstituentVector(t))
    }

    pub fn from_vec(t: Vec<f64>) -> Result<Self> {
        if !t.len().is_multiple_of(2) {
            return Err(DemixError::InvalidArgument(format!(
                "constituent vector must have even length, got {}",
                t.len()
            )));
        }
        Ok(ConstituentVector(t))
    }

    /// Half length, i.e. the signal dimension.
    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn w(&self) -> &[f64] {
        &self.0[..self.n()]
    }

    pub fn z(&self) -> &[f64] {
        &self.0[self.n()..]
    }

    pub fn split(&self) -> (&[f64], &[f64]) {
        self.0.split_at(self.n())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ConstituentVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ConstituentVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `Γ = [Φ Ψ]`, an `n × 2n` dictionary.
#[derive(Clone, Debug)]
pub struct Dictionary {
    phi: Basis,
    psi: Basis,
}

impl Dictionary {
    pub fn new(phi: Basis, psi: Basis) -> Result<Self> {
        check_len("dictionary bases", phi.dim(), psi.dim())?;
        Ok(Dictionary { phi, psi })
    }

    pub fn from_kinds(phi: BasisKind, psi: BasisKind, n: usize) -> Result<Self> {
        Dictionary::new(Basis::new(phi, n)?, Basis::new(psi, n)?)
    }

    pub fn phi(&self) -> &Basis {
        &self.phi
    }

    pub fn psi(&self) -> &Basis {
        &self.psi
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// `Φw + Ψz` for `t = [w; z]`.
    pub fn apply(&self, t: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len("dictionary apply", 2 * n, t.len())?;
        let mut x = t[..n].to_vec();
        self.phi.apply_in_place(&mut x);
        let mut tail = t[n..].to_vec();
        self.psi.apply_in_place(&mut tail);
        x.iter_mut().zip(&tail).for_each(|(a, b)| *a += b);
        Ok(x)
    }

    /// `[Φᵀx; Ψᵀx]`.
    pub fn adjoint(&self, x: &[f64]) -> Result<ConstituentVector> {
        let n = self.dim();
        check_len("dictionary adjoint", n, x.len())?;
        let mut t = Vec::with_capacity(2 * n);
        t.extend_from_slice(x);
        t.extend_from_slice(x);
        let (w, z) = t.split_at_mut(n);
        self.phi.adjoint_in_place(w);
        self.psi.adjoint_in_place(z);
        Ok(ConstituentVector(t))
    }

    /// Column `j` of `Γ` (`j < n` from Φ, otherwise from Ψ).
    pub fn atom(&self, j: usize) -> Vec<f64> {
        let n = self.dim();
        let mut e = vec![0.0; n];
        if j < n {
            e[j] = 1.0;
            self.phi.apply_in_place(&mut e);
        } else {
            e[j - n] = 1.0;
            self.psi.apply_in_place(&mut e);
        }
        e
    }
}
