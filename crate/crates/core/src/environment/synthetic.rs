use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{Outcome, Round};
use crate::glm::LinkFunction;
use crate::rng::Rng;
use crate::{Error, Result, Vector};

/// Binary contexts with `1 ≤ ‖x̄‖₁ ≤ max_ones` drawn with probability
/// proportional to `lambda^‖x̄‖₁`, emitted with unit ℓ₂ norm.
#[derive(Debug, Clone)]
pub struct SyntheticContextDist {
    dim: usize,
    max_ones: usize,
    lambda: f64,
    counts: WeightedIndex<f64>,
}

impl SyntheticContextDist {
    pub fn new(dim: usize, max_ones: usize, lambda: f64) -> Result<Self> {
        if dim == 0 || max_ones == 0 || max_ones > dim {
            return Err(Error::Domain(format!(
                "need 1 <= max_ones <= dim, got max_ones = {max_ones}, dim = {dim}"
            )));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Domain(format!("lambda must lie in (0,1), got {lambda}")));
        }
        let counts = WeightedIndex::new(Self::marginal_weights(dim, max_ones, lambda))
            .map_err(|e| Error::Domain(format!("count weights: {e}")))?;
        Ok(Self {
            dim,
            max_ones,
            lambda,
            counts,
        })
    }

    /// d = 20, at most 8 ones, λ = 0.3.
    pub fn standard() -> Self {
        Self::new(20, 8, 0.3).expect("valid defaults")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_ones(&self) -> usize {
        self.max_ones
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Unnormalized weights C(d,k)·λ^k for k = 1..=max_ones.
    pub fn marginal_weights(dim: usize, max_ones: usize, lambda: f64) -> Vec<f64> {
        (1..=max_ones)
            .map(|k| binomial(dim, k) * lambda.powi(k as i32))
            .collect()
    }

    /// Draw the raw binary vector as the sorted indices of its ones.
    pub fn sample_support(&self, rng: &mut Rng) -> Vec<usize> {
        let k = self.counts.sample(rng) + 1;
        let mut support = index::sample(rng, self.dim, k).into_vec();
        support.sort_unstable();
        support
    }

    pub fn sample(&self, rng: &mut Rng) -> Vector {
        let support = self.sample_support(rng);
        let scale = 1.0 / (support.len() as f64).sqrt();
        let mut x = Vector::zeros(self.dim);
        for i in support {
            x[i] = scale;
        }
        x
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRegime {
    /// θ_h has exactly half its coordinates set to one and θ_m = 1 − θ_h.
    Complementary,
    /// θ_h ~ U[0,1]^d and θ_m ~ U[0,0.5]^d.
    SkewedHuman,
    /// θ_h, θ_m ~ U[0,1]^d.
    UniformRandom,
}

/// Draw `(theta_human, theta_model, w_cost)`; the cost parameter is always
/// uniform on [0,1]^d.
pub fn gen_params(regime: ParamRegime, dim: usize, rng: &mut Rng) -> (Vector, Vector, Vector) {
    let uniform = |rng: &mut Rng, hi: f64| Vector::from_fn(dim, |_, _| rng.random::<f64>() * hi);
    let (theta_h, theta_m) = match regime {
        ParamRegime::Complementary => {
            let mut theta_h = Vector::zeros(dim);
            for i in index::sample(rng, dim, dim / 2) {
                theta_h[i] = 1.0;
            }
            let theta_m = theta_h.map(|v| 1.0 - v);
            (theta_h, theta_m)
        }
        ParamRegime::SkewedHuman => {
            let h = uniform(rng, 1.0);
            let m = uniform(rng, 0.5);
            (h, m)
        }
        ParamRegime::UniformRandom => {
            let h = uniform(rng, 1.0);
            let m = uniform(rng, 1.0);
            (h, m)
        }
    };
    let w = uniform(rng, 1.0);
    (theta_h, theta_m, w)
}

/// Mean of `clamp(m + s·Z, 0, 1)` for standard normal `Z`.
pub fn clipped_normal_mean(mean: f64, sd: f64) -> f64 {
    if sd <= 0.0 {
        return mean.clamp(0.0, 1.0);
    }
    let cdf = |z: f64| 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let a = -mean / sd;
    let b = (1.0 - mean) / sd;
    mean * (cdf(b) - cdf(a)) + sd * (pdf(a) - pdf(b)) + (1.0 - cdf(b))
}

/// GLM rewards for both arms and a GLM deferral cost, each realized as
/// `clamp(μ(xᵀθ) + N(0, σ²), 0, 1)`.
#[derive(Debug, Clone)]
pub struct LinearEnvironment {
    pub theta_model: Vector,
    pub theta_human: Vector,
    pub w_cost: Vector,
    pub noise_sigma: f64,
    pub link_model: LinkFunction,
    pub link_human: LinkFunction,
    pub link_cost: LinkFunction,
}

impl LinearEnvironment {
    pub fn new(theta_model: Vector, theta_human: Vector, w_cost: Vector, noise_sigma: f64, link: LinkFunction) -> Result<Self> {
        let dim = theta_model.len();
        if theta_human.len() != dim || w_cost.len() != dim {
            return Err(Error::Domain("environment parameters differ in dimension".into()));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(Error::Domain(format!("noise sigma must be >= 0, got {noise_sigma}")));
        }
        Ok(Self {
            theta_model,
            theta_human,
            w_cost,
            noise_sigma,
            link_model: link,
            link_human: link,
            link_cost: link,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_model.len()
    }

    /// μ(xᵀθ) for each quantity, before noise and clamping.
    pub fn link_means(&self, x: &Vector) -> Outcome {
        Outcome {
            r_model: self.link_model.mean(x.dot(&self.theta_model)),
            r_human: self.link_human.mean(x.dot(&self.theta_human)),
            cost: self.link_cost.mean(x.dot(&self.w_cost)),
        }
    }

    /// Expected realized values, i.e. the means of the clamped noisy draws.
    pub fn expected(&self, x: &Vector) -> Outcome {
        let m = self.link_means(x);
        Outcome {
            r_model: clipped_normal_mean(m.r_model, self.noise_sigma),
            r_human: clipped_normal_mean(m.r_human, self.noise_sigma),
            cost: clipped_normal_mean(m.cost, self.noise_sigma),
        }
    }

    pub fn realize(&self, x: &Vector, rng: &mut Rng) -> Outcome {
        let m = self.link_means(x);
        let mut noisy = |mean: f64| {
            let eta: f64 = if self.noise_sigma > 0.0 {
                rng.sample::<f64, _>(StandardNormal) * self.noise_sigma
            } else {
                0.0
            };
            (mean + eta).clamp(0.0, 1.0)
        };
        Outcome {
            r_model: noisy(m.r_model),
            r_human: noisy(m.r_human),
            cost: noisy(m.cost),
        }
    }

    /// Draw `horizon` contexts and their realized outcomes, returning the
    /// rounds together with the expected outcome of each round.
    pub fn generate(&self, dist: &SyntheticContextDist, horizon: usize, rng: &mut Rng) -> (Vec<Round>, Vec<Outcome>) {
        let mut rounds = Vec::with_capacity(horizon);
        let mut expected = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let context = dist.sample(rng);
            let outcome = self.realize(&context, rng);
            expected.push(self.expected(&context));
            rounds.push(Round { context, outcome });
        }
        (rounds, expected)
    }
}
