use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moments for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    /// `shapes[i]` is the flat length of parameter tensor `i`.
    pub fn new(config: AdamConfig, shapes: &[usize]) -> Self {
        AdamState {
            config,
            step: 0,
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::shape(format!(
                "adam: state tracks {} tensors, got {} params / {} grads",
                self.first_moment.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first_moment[i].len() || g.len() != p.len() {
                return Err(Error::shape(format!("adam: tensor {i} shape mismatch")));
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);

        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
        {
            for j in 0..p.len() {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                let m_hat = m[j] / correction1;
                let v_hat = v[j] / correction2;
                p[j] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_and_decays_moments() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut w = vec![1.0, -2.0];
        state.step(&mut [&mut w], &[&[0.5, 0.5]]).unwrap();
        let m_before = state.first_moment()[0][0];
        let w_before = w.clone();
        state.step(&mut [&mut w], &[&[0.0, 0.0]]).unwrap();
        assert!(state.first_moment()[0][0].abs() < m_before.abs());
        // With a zero gradient the step is driven only by the decaying moment;
        // from a fresh state it is exactly zero.
        let mut fresh = AdamState::new(AdamConfig::default(), &[2]);
        let mut z = w_before.clone();
        fresh.step(&mut [&mut z], &[&[0.0, 0.0]]).unwrap();
        assert_eq!(z, w_before);
        assert_eq!(fresh.step, 1);
    }

    #[test]
    fn constant_gradient_step_approaches_learning_rate() {
        // With g constant, m̂ = g and v̂ = g² exactly after bias correction, so
        // every step is lr · g/(|g| + ε).
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(cfg, &[1]);
        let mut w = vec![0.0];
        let mut last = 0.0;
        for _ in 0..200 {
            let before = w[0];
            state.step(&mut [&mut w], &[&[3.0]]).unwrap();
            last = before - w[0];
        }
        let expected = cfg.learning_rate * 3.0 / (3.0 + cfg.epsilon);
        assert!((last - expected).abs() < 1e-12, "{last} vs {expected}");
    }

    #[test]
    fn quadratic_bowl_converges() {
        let cfg = AdamConfig {
            learning_rate: 0.01,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(cfg, &[1]);
        let mut w = vec![1.0];
        for _ in 0..5000 {
            let g = 2.0 * w[0];
            state.step(&mut [&mut w], &[&[g]]).unwrap();
        }
        assert!(w[0].abs() < 1e-3, "w = {}", w[0]);
    }

    #[test]
    fn shape_mismatch() {
        let mut state = AdamState::new(AdamConfig::default(), &[2]);
        let mut w = vec![0.0; 3];
        assert!(state.step(&mut [&mut w], &[&[0.0; 3]]).is_err());
    }
}
