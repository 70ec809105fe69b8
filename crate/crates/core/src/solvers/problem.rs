use crate::error::{check_len, DemixError, Result};
use crate::links::Link;
use crate::measurement::{dot, MeasurementOperator};
use crate::transforms::{ConstituentVector, Dictionary};

/// Everything a recovery algorithm sees: `A`, `Γ`, `g`, `y` and the
/// per-component sparsity `s`.
#[derive(Clone, Debug)]
pub struct DemixProblem {
    operator: MeasurementOperator,
    dictionary: Dictionary,
    link: Link,
    y: Vec<f64>,
    sparsity: usize,
}

impl DemixProblem {
    pub fn new(
        operator: MeasurementOperator,
        dictionary: Dictionary,
        link: Link,
        y: Vec<f64>,
        sparsity: usize,
    ) -> Result<Self> {
        check_len("problem signal dimension", operator.cols(), dictionary.dim())?;
        check_len("problem observations", operator.rows(), y.len())?;
        if sparsity > dictionary.dim() {
            return Err(DemixError::InvalidArgument(format!(
                "sparsity {sparsity} exceeds dimension {}",
                dictionary.dim()
            )));
        }
        Ok(DemixProblem {
            operator,
            dictionary,
            link,
            y,
            sparsity,
        })
    }

    pub fn operator(&self) -> &MeasurementOperator {
        &self.operator
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    /// Signal dimension `n`.
    pub fn dim(&self) -> usize {
        self.dictionary.dim()
    }

    pub fn num_measurements(&self) -> usize {
        self.y.len()
    }

    /// `x̂_lin = (1/m) Aᵀ y`.
    pub fn linear_estimate(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.operator.adjoint_into(&self.y, &mut x);
        let inv_m = 1.0 / self.num_measurements() as f64;
        x.iter_mut().for_each(|v| *v *= inv_m);
        x
    }

    /// `u = AΓt`.
    pub fn forward(&self, t: &[f64]) -> Result<Vec<f64>> {
        let x = self.dictionary.apply(t)?;
        let mut u = vec![0.0; self.num_measurements()];
        self.operator.measure_into(&x, &mut u);
        Ok(u)
    }

    /// `(1/m) Γᵀ Aᵀ r`.
    pub(crate) fn pull_back(&self, r: &[f64]) -> ConstituentVector {
        let mut x = vec![0.0; self.dim()];
        self.operator.adjoint_into(r, &mut x);
        let inv_m = 1.0 / self.num_measurements() as f64;
        x.iter_mut().for_each(|v| *v *= inv_m);
        self.dictionary.adjoint(&x).expect("dimension checked at construction")
    }

    /// `F(t) = (1/m) Σ Θ(a_iᵀΓt) − y_i a_iᵀΓt`.
    pub fn loss(&self, t: &[f64]) -> Result<f64> {
        self.link.require_potential()?;
        let u = self.forward(t)?;
        Ok(self.loss_from_forward(&u))
    }

    /// `∇F(t) = (1/m) Γᵀ Aᵀ (g(AΓt) − y)`.
    pub fn gradient(&self, t: &[f64]) -> Result<ConstituentVector> {
        self.link.require_derivative()?;
        let u = self.forward(t)?;
        Ok(self.gradient_from_forward(&u))
    }

    pub(crate) fn loss_from_forward(&self, u: &[f64]) -> f64 {
        let sum: f64 = u
            .iter()
            .zip(&self.y)
            .map(|(&ui, &yi)| self.link.potential_unchecked(ui) - yi * ui)
            .sum();
        sum / self.num_measurements() as f64
    }

    pub(crate) fn gradient_from_forward(&self, u: &[f64]) -> ConstituentVector {
        let r: Vec<f64> = u
            .iter()
            .zip(&self.y)
            .map(|(&ui, &yi)| self.link.eval(ui) - yi)
            .collect();
        self.pull_back(&r)
    }

    /// Hessian-vector product `∇²F(t) v = (1/m) Γᵀ Aᵀ diag(g'(AΓt)) AΓ v`.
    pub fn hessian_apply(&self, t: &[f64], v: &[f64]) -> Result<ConstituentVector> {
        self.link.require_derivative()?;
        let u = self.forward(t)?;
        let mut av = self.forward(v)?;
        av.iter_mut()
            .zip(&u)
            .for_each(|(a, &ui)| *a *= self.link.deriv_unchecked(ui));
        Ok(self.pull_back(&av))
    }

    /// Restricted Hessian `(1/m) Γ_ξᵀ Aᵀ D A Γ_ξ` on the columns `support`,
    /// with `D = diag(g'(AΓt))`; returned row-major `|ξ| × |ξ|`.
    pub fn restricted_hessian(&self, t: &[f64], support: &[usize]) -> Result<Vec<f64>> {
        self.link.require_derivative()?;
        let two_n = 2 * self.dim();
        if let Some(&bad) = support.iter().find(|&&j| j >= two_n) {
            return Err(DemixError::InvalidArgument(format!(
                "support index {bad} out of range for 2n = {two_n}"
            )));
        }
        let weights: Vec<f64> = self
            .forward(t)?
            .iter()
            .map(|&ui| self.link.deriv_unchecked(ui))
            .collect();
        let m = self.num_measurements();
        let k = support.len();
        // Columns of AΓ_ξ, each scaled by sqrt of the weights.
        let cols: Vec<Vec<f64>> = support
            .iter()
            .map(|&j| {
                let atom = self.dictionary.atom(j);
                let mut col = vec![0.0; m];
                self.operator.measure_into(&atom, &mut col);
                col.iter_mut()
                    .zip(&weights)
                    .for_each(|(c, w)| *c *= w.sqrt());
                col
            })
            .collect();
        let mut h = vec![0.0; k * k];
        let inv_m = 1.0 / m as f64;
        for a in 0..k {
            for b in a..k {
                let v = dot(&cols[a], &cols[b]) * inv_m;
                h[a * k + b] = v;
                h[b * k + a] = v;
            }
        }
        Ok(h)
    }
}
