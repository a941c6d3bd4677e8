use crate::glm::estimator::ArmEstimator;
use crate::{Error, Result, Vector};

/// Parameters of the confidence ellipsoid radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceConfig {
    /// Sub-Gaussian noise scale.
    pub sigma: f64,
    /// Lower bound on the link slope.
    pub kappa: f64,
    /// Failure probability.
    pub delta: f64,
}

impl ConfidenceConfig {
    pub fn new(sigma: f64, kappa: f64, delta: f64) -> Result<Self> {
        let cfg = Self { sigma, kappa, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }
}

/// β(t) = (σ/κ)·sqrt(2·d·ln((1 + 2·t·d)/δ)).
pub fn confidence_radius(cfg: &ConfidenceConfig, t: u64, d: usize) -> f64 {
    let t = t.max(1) as f64;
    let d = d.max(1) as f64;
    (cfg.sigma / cfg.kappa) * (2.0 * d * ((1.0 + 2.0 * t * d) / cfg.delta).ln()).sqrt()
}

/// Which edge of the confidence ellipsoid to move to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Maximize the predicted response (rewards).
    RewardUp,
    /// Minimize the predicted response (costs).
    CostDown,
}

/// θ̂ ± β·M⁻¹x/√(xᵀM⁻¹x): the parameter on the ellipsoid boundary that is
/// extremal in the direction of `x`.
pub fn optimistic_param(est: &ArmEstimator, x: &Vector, beta: f64, direction: Direction) -> Result<Vector> {
    if x.len() != est.dim() {
        return Err(Error::Domain(format!(
            "context has dimension {}, estimator expects {}",
            x.len(),
            est.dim()
        )));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::Domain("optimistic estimate undefined for the zero context".into()));
    }
    let scaled = est.design_inverse() * x;
    let width = x.dot(&scaled);
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Numeric(format!("ellipsoid norm of context is {width}")));
    }
    let step = scaled * (beta / width.sqrt());
    Ok(match direction {
        Direction::RewardUp => est.theta_hat() + step,
        Direction::CostDown => est.theta_hat() - step,
    })
}
