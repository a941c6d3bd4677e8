use rand::Rng as _;

use crate::glm::LinkFunction;
use crate::rng::Rng;
use crate::{Error, Matrix, Result, Vector};

pub const HIDDEN_WIDTH: usize = 50;

/// `input → ReLU(hidden) → sigmoid(1)` feed-forward network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// input × hidden
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Vector,
    pub b2: f64,
}

/// Gradient of a loss with respect to every [`Mlp`] parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub w1: Matrix,
    pub b1: Vector,
    pub w2: Vector,
    pub b2: f64,
}

impl MlpGrads {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w1: Matrix::zeros(input, hidden),
            b1: Vector::zeros(hidden),
            w2: Vector::zeros(hidden),
            b2: 0.0,
        }
    }

    pub fn slices(&self) -> [&[f64]; 4] {
        [
            self.w1.as_slice(),
            self.b1.as_slice(),
            self.w2.as_slice(),
            std::slice::from_ref(&self.b2),
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_mut_slice(),
            self.b1.as_mut_slice(),
            self.w2.as_mut_slice(),
            std::slice::from_mut(&mut self.b2),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

impl Mlp {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w1: Matrix::zeros(input, hidden),
            b1: Vector::zeros(hidden),
            w2: Vector::zeros(hidden),
            b2: 0.0,
        }
    }

    /// Uniform weights in ±1/√fan_in per layer.
    pub fn init(input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let a1 = 1.0 / (input as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        let mut u = |a: f64| rng.random_range(-a..=a);
        let w1 = Matrix::from_fn(input, hidden, |_, _| u(a1));
        let b1 = Vector::from_fn(hidden, |_, _| u(a1));
        let w2 = Vector::from_fn(hidden, |_, _| u(a2));
        let b2 = u(a2);
        Self { w1, b1, w2, b2 }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_mut_slice(),
            self.b1.as_mut_slice(),
            self.w2.as_mut_slice(),
            std::slice::from_mut(&mut self.b2),
        ]
    }

    fn pre_activation(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.input_dim() {
            return Err(Error::Domain(format!(
                "network expects input dimension {}, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(self.w1.tr_mul(x) + &self.b1)
    }

    /// Hidden activations and the sigmoid prediction.
    pub fn forward(&self, x: &Vector) -> Result<(Vector, f64)> {
        let hidden = self.pre_activation(x)?.map(|v| v.max(0.0));
        let prediction = LinkFunction::logistic().mean(self.w2.dot(&hidden) + self.b2);
        Ok((hidden, prediction))
    }

    pub fn embed(&self, x: &Vector) -> Result<Vector> {
        Ok(self.forward(x)?.0)
    }

    /// Mean squared error over the batch.
    pub fn loss(&self, batch: &[(&Vector, f64)]) -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in batch {
            let (_, p) = self.forward(x)?;
            total += (p - y) * (p - y);
        }
        Ok(total / batch.len() as f64)
    }

    /// Loss and its analytic gradient by backpropagation.
    pub fn gradients(&self, batch: &[(&Vector, f64)]) -> Result<(f64, MlpGrads)> {
        let mut g = MlpGrads::zeros(self.input_dim(), self.hidden_dim());
        let n = batch.len() as f64;
        let mut total = 0.0;
        for (x, y) in batch {
            let z1 = self.pre_activation(x)?;
            let h = z1.map(|v| v.max(0.0));
            let p = LinkFunction::logistic().mean(self.w2.dot(&h) + self.b2);
            total += (p - y) * (p - y);
            let d2 = 2.0 * (p - y) / n * p * (1.0 - p);
            g.w2.axpy(d2, &h, 1.0);
            g.b2 += d2;
            let d1 = Vector::from_fn(h.len(), |j, _| if z1[j] > 0.0 { d2 * self.w2[j] } else { 0.0 });
            g.w1.ger(1.0, x, &d1, 1.0);
            g.b1 += &d1;
        }
        Ok((total / n, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_network_predicts_half() {
        let net = Mlp::zeros(4, HIDDEN_WIDTH);
        let (h, p) = net.forward(&Vector::from_element(4, 0.3)).unwrap();
        assert_eq!(h, Vector::zeros(HIDDEN_WIDTH));
        assert_eq!(p, 0.5);
    }

    #[test]
    fn negative_pre_activations_are_floored() {
        let mut net = Mlp::zeros(3, 8);
        net.b1 = Vector::from_element(8, -1.0);
        net.w1 = Matrix::from_element(3, 8, -0.5);
        let (h, _) = net.forward(&Vector::from_element(3, 0.4)).unwrap();
        assert!(h.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn forward_matches_scalar_oracle() {
        let mut rng = rng::from_seed(17);
        let net = Mlp::init(6, HIDDEN_WIDTH, &mut rng);
        let x: Vec<f64> = (0..6).map(|i| 0.1 * i as f64 - 0.2).collect();
        // Independent scalar-loop implementation.
        let mut z2 = net.b2;
        for j in 0..HIDDEN_WIDTH {
            let mut z = net.b1[j];
            for (i, xi) in x.iter().enumerate() {
                z += net.w1[(i, j)] * xi;
            }
            z2 += net.w2[j] * if z > 0.0 { z } else { 0.0 };
        }
        let oracle = 1.0 / (1.0 + (-z2).exp());
        let (_, p) = net.forward(&Vector::from_vec(x)).unwrap();
        assert!((p - oracle).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let net = Mlp::zeros(3, 4);
        assert!(matches!(net.forward(&Vector::zeros(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn init_is_bounded() {
        let mut rng = rng::from_seed(1);
        let net = Mlp::init(16, HIDDEN_WIDTH, &mut rng);
        assert!(net.w1.iter().all(|v| v.abs() <= 0.25));
        assert!(net.w2.iter().all(|v| v.abs() <= 1.0 / 50f64.sqrt()));
    }
}
