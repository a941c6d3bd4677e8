use nalgebra::SymmetricEigen;

use crate::glm::link::{LinkFunction, LinkKind};
use crate::glm::mle::{mle_fit_with, MleSettings};
use crate::{Error, Matrix, Result, Vector};

/// Number of rank-1 inverse updates between direct re-inversions.
pub const REFRESH_PERIOD: usize = 512;

/// Per-arm GLM state: regularized design matrix, its inverse, the MLE and the
/// log of observations it was fitted on.
#[derive(Debug, Clone)]
pub struct ArmEstimator {
    link: LinkFunction,
    ridge: f64,
    design: Matrix,
    design_inv: Matrix,
    moment: Vector,
    theta_hat: Vector,
    history: Vec<(Vector, f64)>,
    rank_one_updates: usize,
    /// Contexts must satisfy `‖x‖₂ ≤ max_norm` when set.
    max_norm: Option<f64>,
    /// Logistic estimators refit every `refit_period` observations.
    refit_period: usize,
    fitted_on: usize,
    settings: MleSettings,
}

impl ArmEstimator {
    pub fn new(link: LinkFunction, dim: usize, ridge: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("estimator dimension must be positive".into()));
        }
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(Error::Singular(format!(
                "online estimators need a positive ridge, got {ridge}"
            )));
        }
        Ok(Self {
            link,
            ridge,
            design: Matrix::identity(dim, dim) * ridge,
            design_inv: Matrix::identity(dim, dim) / ridge,
            moment: Vector::zeros(dim),
            theta_hat: Vector::zeros(dim),
            history: Vec::new(),
            rank_one_updates: 0,
            max_norm: Some(1.0),
            refit_period: 1,
            fitted_on: 0,
            settings: MleSettings::default(),
        })
    }

    /// Drop the unit-ball restriction on contexts (used for learned embeddings).
    pub fn without_norm_bound(mut self) -> Self {
        self.max_norm = None;
        self
    }

    /// Refit a logistic estimator only every `period` observations.
    pub fn with_refit_period(mut self, period: usize) -> Self {
        self.refit_period = period.max(1);
        self
    }

    pub fn link(&self) -> LinkFunction {
        self.link
    }

    pub fn dim(&self) -> usize {
        self.theta_hat.len()
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn n_obs(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[(Vector, f64)] {
        &self.history
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn design_inverse(&self) -> &Matrix {
        &self.design_inv
    }

    /// The current MLE. For logistic links call [`Self::refresh`] first to
    /// fold in recent observations.
    pub fn theta_hat(&self) -> &Vector {
        &self.theta_hat
    }

    /// μ(xᵀθ̂).
    pub fn predict(&self, x: &Vector) -> f64 {
        self.link.mean(x.dot(&self.theta_hat))
    }

    fn check_context(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "context has dimension {}, estimator expects {}",
                x.len(),
                self.dim()
            )));
        }
        if let Some(bound) = self.max_norm {
            let norm = x.norm();
            if norm > bound + 1e-9 {
                return Err(Error::Domain(format!("context norm {norm} exceeds {bound}")));
            }
        }
        Ok(())
    }

    /// Add one observation: `M ← M + xxᵀ` with a rank-1 inverse update, and
    /// refresh the estimate.
    pub fn update(&mut self, x: &Vector, y: f64) -> Result<()> {
        self.check_context(x)?;
        if !y.is_finite() {
            return Err(Error::Domain(format!("non-finite response {y}")));
        }
        self.design.ger(1.0, x, x, 1.0);
        self.rank_one_updates += 1;
        if self.rank_one_updates.is_multiple_of(REFRESH_PERIOD) {
            self.reinvert()?;
        } else {
            let u = &self.design_inv * x;
            let denom = 1.0 + x.dot(&u);
            self.design_inv.ger(-1.0 / denom, &u, &u, 1.0);
        }
        self.moment.axpy(y, x, 1.0);
        self.history.push((x.clone(), y));
        match self.link.kind() {
            LinkKind::Identity => self.theta_hat = &self.design_inv * &self.moment,
            LinkKind::Logistic => {
                if self.history.len() - self.fitted_on >= self.refit_period {
                    self.refit()?;
                }
            }
        }
        Ok(())
    }

    /// Bring θ̂ up to date with every logged observation.
    pub fn refresh(&mut self) -> Result<()> {
        if self.link.kind() == LinkKind::Logistic && self.fitted_on != self.history.len() {
            self.refit()?;
        }
        Ok(())
    }

    fn refit(&mut self) -> Result<()> {
        if !self.history.is_empty() {
            self.theta_hat = mle_fit_with(
                self.link,
                &self.history,
                self.ridge,
                self.settings,
                Some(&self.theta_hat),
            )?;
        }
        self.fitted_on = self.history.len();
        Ok(())
    }

    fn reinvert(&mut self) -> Result<()> {
        self.design_inv = self
            .design
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numeric("design matrix is not positive definite".into()))?
            .inverse();
        Ok(())
    }

    /// Replace the observation log and rebuild M, M⁻¹ and θ̂ from scratch.
    pub fn rebuild(&mut self, history: Vec<(Vector, f64)>) -> Result<()> {
        let dim = self.dim();
        for (x, _) in &history {
            self.check_context(x)?;
        }
        self.design = Matrix::identity(dim, dim) * self.ridge;
        self.moment = Vector::zeros(dim);
        for (x, y) in &history {
            self.design.ger(1.0, x, x, 1.0);
            self.moment.axpy(*y, x, 1.0);
        }
        self.reinvert()?;
        self.rank_one_updates = 0;
        self.history = history;
        match self.link.kind() {
            LinkKind::Identity => self.theta_hat = &self.design_inv * &self.moment,
            LinkKind::Logistic => {
                self.fitted_on = 0;
                self.refit()?;
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue of the un-regularized design sum Σ xxᵀ.
    pub fn min_eigen_unridged(&self) -> f64 {
        let dim = self.dim();
        let raw = &self.design - Matrix::identity(dim, dim) * self.ridge;
        SymmetricEigen::new(raw).eigenvalues.min()
    }
}
