use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Identity,
    Logistic,
}

/// Monotone map from a linear score to an expected response.
///
/// `kappa_floor` is the configured lower bound on the slope over the feasible
/// set; it scales the confidence radius of estimators using this link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFunction {
    kind: LinkKind,
    kappa_floor: f64,
}

impl LinkFunction {
    pub const DEFAULT_LOGISTIC_KAPPA: f64 = 0.1;

    pub fn identity() -> Self {
        Self {
            kind: LinkKind::Identity,
            kappa_floor: 1.0,
        }
    }

    pub fn logistic() -> Self {
        Self {
            kind: LinkKind::Logistic,
            kappa_floor: Self::DEFAULT_LOGISTIC_KAPPA,
        }
    }

    /// Logistic link with an explicit slope floor, which must lie in (0, 1/4].
    pub fn logistic_with_kappa(kappa_floor: f64) -> Result<Self> {
        if !(kappa_floor > 0.0 && kappa_floor <= 0.25) {
            return Err(Error::Domain(format!(
                "logistic kappa floor must lie in (0, 0.25], got {kappa_floor}"
            )));
        }
        Ok(Self {
            kind: LinkKind::Logistic,
            kappa_floor,
        })
    }

    pub fn from_kind(kind: LinkKind) -> Self {
        match kind {
            LinkKind::Identity => Self::identity(),
            LinkKind::Logistic => Self::logistic(),
        }
    }

    pub fn kind(&self) -> LinkKind {
        self.kind
    }

    pub fn kappa_floor(&self) -> f64 {
        self.kappa_floor
    }

    /// Upper bound on the slope of the link.
    pub fn lipschitz(&self) -> f64 {
        match self.kind {
            LinkKind::Identity => 1.0,
            LinkKind::Logistic => 0.25,
        }
    }

    /// Checked evaluation of μ(z).
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("link evaluated at non-finite score {z}")));
        }
        Ok(self.mean(z))
    }

    /// μ(z) without the finiteness check.
    #[inline]
    pub fn mean(&self, z: f64) -> f64 {
        match self.kind {
            LinkKind::Identity => z,
            LinkKind::Logistic => sigmoid(z),
        }
    }

    /// μ'(z).
    #[inline]
    pub fn slope(&self, z: f64) -> f64 {
        match self.kind {
            LinkKind::Identity => 1.0,
            LinkKind::Logistic => {
                let p = sigmoid(z);
                p * (1.0 - p)
            }
        }
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
