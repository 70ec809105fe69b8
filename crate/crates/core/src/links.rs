//! Scalar link functions `g`, their derivatives `g'` and antiderivatives `Θ`
//! (normalised so that `Θ(0) = 0`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DemixError, Result};

/// Default half-width of the interval on which derivative bounds are certified.
pub const DEFAULT_WORKING_RADIUS: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    /// `sign(u)`, with `sign(0) = 0`.
    #[serde(rename = "sign")]
    Sign,
    /// `2u + sin(u)`.
    #[serde(rename = "linsin")]
    LinearSine,
    /// `1 / (1 + e^{-u})`.
    #[serde(rename = "logistic")]
    Logistic,
    /// `½ (1 - e^{-u}) / (1 + e^{-u})`, i.e. `½ tanh(u/2)`.
    #[serde(rename = "shifted-logistic")]
    ShiftedLogistic,
}

impl LinkKind {
    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Sign => "sign",
            LinkKind::LinearSine => "linsin",
            LinkKind::Logistic => "logistic",
            LinkKind::ShiftedLogistic => "shifted-logistic",
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkKind {
    type Err = DemixError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sign" => Ok(LinkKind::Sign),
            "linsin" | "linear-sine" => Ok(LinkKind::LinearSine),
            "logistic" => Ok(LinkKind::Logistic),
            "shifted-logistic" | "shiftedlogistic" => Ok(LinkKind::ShiftedLogistic),
            other => Err(DemixError::InvalidArgument(format!(
                "unknown link `{other}` (expected sign, linsin, logistic or shifted-logistic)"
            ))),
        }
    }
}

/// A link function together with the working interval `[-R, R]` used for
/// its derivative bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    kind: LinkKind,
    radius: f64,
}

impl Link {
    pub fn new(kind: LinkKind) -> Self {
        Link {
            kind,
            radius: DEFAULT_WORKING_RADIUS,
        }
    }

    pub fn with_radius(kind: LinkKind, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(DemixError::InvalidArgument(format!(
                "working radius must be positive, got {radius}"
            )));
        }
        Ok(Link { kind, radius })
    }

    pub fn kind(&self) -> LinkKind {
        self.kind
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn has_derivative(&self) -> bool {
        self.kind != LinkKind::Sign
    }

    pub fn has_potential(&self) -> bool {
        self.kind != LinkKind::Sign
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            LinkKind::Sign => {
                if u > 0.0 {
                    1.0
                } else if u < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LinkKind::LinearSine => 2.0 * u + u.sin(),
            LinkKind::Logistic => logistic(u),
            LinkKind::ShiftedLogistic => 0.5 * (0.5 * u).tanh(),
        }
    }

    pub fn deriv(&self, u: f64) -> Result<f64> {
        self.require_derivative()?;
        Ok(self.deriv_unchecked(u))
    }

    pub fn potential(&self, u: f64) -> Result<f64> {
        self.require_potential()?;
        Ok(self.potential_unchecked(u))
    }

    /// `(l1, l2)` with `l1 <= g'(u) <= l2` on the working interval.
    pub fn derivative_bounds(&self) -> Result<(f64, f64)> {
        self.require_derivative()?;
        Ok(match self.kind {
            LinkKind::LinearSine => (1.0, 3.0),
            // g' peaks at the origin and decays monotonically in |u|.
            LinkKind::Logistic | LinkKind::ShiftedLogistic => {
                (self.deriv_unchecked(self.radius), 0.25)
            }
            LinkKind::Sign => unreachable!(),
        })
    }

    pub(crate) fn require_derivative(&self) -> Result<()> {
        if self.has_derivative() {
            Ok(())
        } else {
            Err(DemixError::Capability {
                link: self.kind.name(),
                capability: "a derivative",
            })
        }
    }

    pub(crate) fn require_potential(&self) -> Result<()> {
        if self.has_potential() {
            Ok(())
        } else {
            Err(DemixError::Capability {
                link: self.kind.name(),
                capability: "a potential",
            })
        }
    }

    pub(crate) fn deriv_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            LinkKind::Sign => 0.0,
            LinkKind::LinearSine => 2.0 + u.cos(),
            LinkKind::Logistic => {
                let e = (-u.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            LinkKind::ShiftedLogistic => {
                let th = (0.5 * u).tanh();
                0.25 * (1.0 - th * th)
            }
        }
    }

    pub(crate) fn potential_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            LinkKind::Sign => f64::NAN,
            LinkKind::LinearSine => u * u - u.cos() + 1.0,
            LinkKind::Logistic => softplus(u) - std::f64::consts::LN_2,
            // ln cosh(u/2)
            LinkKind::ShiftedLogistic => {
                0.5 * u.abs() + (-u.abs()).exp().ln_1p() - std::f64::consts::LN_2
            }
        }
    }
}

impl From<LinkKind> for Link {
    fn from(kind: LinkKind) -> Self {
        Link::new(kind)
    }
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}
