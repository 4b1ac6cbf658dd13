use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Norm below which a transmitter output is treated as dead.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Relu,
    Softmax,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Softmax => "softmax",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "linear" => Activation::Linear,
            "relu" => Activation::Relu,
            "softmax" => Activation::Softmax,
            "sigmoid" => Activation::Sigmoid,
            "tanh" => Activation::Tanh,
            _ => return None,
        })
    }

    pub fn apply(self, pre: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear => pre.to_vec(),
            Activation::Relu => pre.iter().map(|&s| s.max(0.0)).collect(),
            Activation::Softmax => softmax(pre),
            Activation::Sigmoid => pre.iter().map(|&u| 1.0 / (1.0 + (-u).exp())).collect(),
            Activation::Tanh => pre.iter().map(|&u| u.tanh()).collect(),
        }
    }

    /// Vector-Jacobian product: gradient w.r.t. the pre-activation given the
    /// gradient w.r.t. the output.
    pub fn backward(self, pre: &[f64], out: &[f64], grad_out: &[f64]) -> Vec<f64> {
        match self {
            Activation::Linear => grad_out.to_vec(),
            Activation::Relu => pre
                .iter()
                .zip(grad_out)
                .map(|(&s, &g)| if s > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::Softmax => {
                let gp: f64 = grad_out.iter().zip(out).map(|(g, p)| g * p).sum();
                out.iter().zip(grad_out).map(|(&p, &g)| p * (g - gp)).collect()
            }
            Activation::Sigmoid => out.iter().zip(grad_out).map(|(&y, &g)| g * y * (1.0 - y)).collect(),
            Activation::Tanh => out.iter().zip(grad_out).map(|(&y, &g)| g * (1.0 - y * y)).collect(),
        }
    }
}

/// Softmax with max subtraction. Entries that would underflow are clamped to
/// the smallest positive normal so every output stays in (0, 1].
pub fn softmax(u: &[f64]) -> Vec<f64> {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = u.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| (e / sum).max(f64::MIN_POSITIVE)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::shape(format!(
                "bias has {} entries, weights have {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights in ±√(6/(fan_in+fan_out)), zero biases.
    pub fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..=limit))
            .collect();
        DenseLayer {
            weights: Matrix::from_vec(outputs, inputs, data).expect("sized by construction"),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }

    /// `W·input + b`
    pub fn pre_activation(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut pre = self.weights.matvec(input)?;
        for (p, b) in pre.iter_mut().zip(&self.bias) {
            *p += b;
        }
        Ok(pre)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.activation.apply(&self.pre_activation(input)?))
    }
}

/// Scales `x` to `√n · x / ‖x‖₂`, i.e. unit mean symbol power.
pub fn power_normalize(x: &[f64]) -> Result<Vec<f64>> {
    let norm = l2_norm(x);
    if norm < DEGENERATE_NORM || !norm.is_finite() {
        return Err(Error::Degenerate(format!(
            "power normalization of a vector with norm {norm:e} (dead transmitter?)"
        )));
    }
    let scale = (x.len() as f64).sqrt() / norm;
    Ok(x.iter().map(|v| v * scale).collect())
}

/// Vector-Jacobian product of [`power_normalize`] at `x`:
/// `J = √n/‖x‖ · (I − x xᵀ/‖x‖²)`, which is symmetric.
pub fn power_normalize_backward(x: &[f64], grad_out: &[f64]) -> Result<Vec<f64>> {
    if x.len() != grad_out.len() {
        return Err(Error::shape("power_normalize_backward: length mismatch"));
    }
    let norm = l2_norm(x);
    if norm < DEGENERATE_NORM {
        return Err(Error::Degenerate(format!(
            "power normalization gradient at norm {norm:e}"
        )));
    }
    let scale = (x.len() as f64).sqrt() / norm;
    let proj = super::matrix::dot(x, grad_out) / (norm * norm);
    Ok(x.iter()
        .zip(grad_out)
        .map(|(&xi, &g)| scale * (g - xi * proj))
        .collect())
}

fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layer(rows: &[&[f64]], bias: &[f64], act: Activation) -> DenseLayer {
        DenseLayer::new(Matrix::from_rows(rows).unwrap(), bias.to_vec(), act).unwrap()
    }

    #[test]
    fn relu_identity_layer() {
        let l = layer(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], Activation::Relu);
        assert_eq!(l.forward(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn softmax_identity_layer() {
        let l = layer(&[&[1.0, 0.0], &[0.0, 1.0]], &[0.0, 0.0], Activation::Softmax);
        assert_eq!(l.forward(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn linear_layer_hand_arithmetic() {
        let l = layer(&[&[2.0, 0.0], &[0.0, 3.0]], &[1.0, 1.0], Activation::Linear);
        assert_eq!(l.forward(&[1.0, 1.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn dense_forward_rejects_wrong_input_length() {
        let l = layer(&[&[1.0, 0.0]], &[0.0], Activation::Linear);
        assert!(matches!(l.forward(&[1.0]), Err(Error::Shape(_))));
        assert!(DenseLayer::new(Matrix::identity(2), vec![0.0], Activation::Relu).is_err());
    }

    #[test]
    fn sigmoid_and_tanh_values() {
        let s = Activation::Sigmoid.apply(&[0.0]);
        let t = Activation::Tanh.apply(&[0.0, 1.0]);
        assert_eq!(s, vec![0.5]);
        assert_eq!(t[0], 0.0);
        assert!((t[1] - 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn softmax_survives_huge_logits() {
        let p = softmax(&[1000.0, -1000.0, 0.0]);
        assert!(p.iter().all(|v| *v > 0.0 && *v <= 1.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_normalize_examples() {
        assert_eq!(power_normalize(&[1.0; 7]).unwrap(), vec![1.0; 7]);
        let out = power_normalize(&[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((out[0] - 7f64.sqrt()).abs() < 1e-15);
        assert!(out[1..].iter().all(|v| *v == 0.0));
        assert!(matches!(power_normalize(&[0.0, 1e-14]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn power_normalize_gradient_ignores_uniform_scaling() {
        let x = vec![0.7; 5];
        let g = power_normalize_backward(&x, &[1.0; 5]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn softmax_is_a_distribution(u in prop::collection::vec(-50.0f64..50.0, 1..40)) {
            let p = softmax(&u);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|v| *v > 0.0 && *v <= 1.0));
        }

        #[test]
        fn power_normalize_unit_mean_power(x in prop::collection::vec(-10.0f64..10.0, 1..32)) {
            prop_assume!(x.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-6);
            let out = power_normalize(&x).unwrap();
            let mean_power = out.iter().map(|v| v * v).sum::<f64>() / out.len() as f64;
            prop_assert!((mean_power - 1.0).abs() < 1e-12);
        }
    }
}
