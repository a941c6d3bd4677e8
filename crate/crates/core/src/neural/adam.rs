use super::mlp::{Mlp, MlpGrads};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamSettings {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamSettings {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment accumulators shaped like one [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub settings: AdamSettings,
    pub first: MlpGrads,
    pub second: MlpGrads,
    pub steps: u64,
}

impl Adam {
    pub fn new(net: &Mlp, settings: AdamSettings) -> Self {
        Self {
            settings,
            first: MlpGrads::zeros(net.input_dim(), net.hidden_dim()),
            second: MlpGrads::zeros(net.input_dim(), net.hidden_dim()),
            steps: 0,
        }
    }

    /// Apply one bias-corrected Adam update.
    pub fn apply(&mut self, net: &mut Mlp, grads: &MlpGrads) {
        let s = self.settings;
        self.steps += 1;
        let t = self.steps as i32;
        let c1 = 1.0 - s.beta1.powi(t);
        let c2 = 1.0 - s.beta2.powi(t);
        let params = net.slices_mut();
        let firsts = self.first.slices_mut();
        let seconds = self.second.slices_mut();
        for (((p, g), m), v) in params.into_iter().zip(grads.slices()).zip(firsts).zip(seconds) {
            for i in 0..p.len() {
                m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
                v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= s.learning_rate * m_hat / (v_hat.sqrt() + s.epsilon);
            }
        }
    }
}
