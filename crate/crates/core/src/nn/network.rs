use super::layer::{power_normalize, power_normalize_backward, DenseLayer};
use super::loss::{loss_eval, loss_gradient, LossKind};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    /// Parameterless per-example l2 power normalization.
    PowerNormalize,
}

impl Layer {
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        match self {
            Layer::Dense(d) => d.forward(input),
            Layer::PowerNormalize => power_normalize(input),
        }
    }
}

/// A feed-forward stack of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `inputs[i]` is the input of layer `i`.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of dense layers (empty for normalization).
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn layer_input(&self, i: usize) -> &[f64] {
        &self.inputs[i]
    }

    pub fn pre_activation(&self, i: usize) -> &[f64] {
        &self.pre[i]
    }
}

/// Flat gradient tensors, two per dense layer (weights row-major, then bias),
/// in layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(network: &Network) -> Self {
        Gradients {
            tensors: network.tensor_shapes().into_iter().map(|n| vec![0.0; n]).collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            for v in t.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn as_slices(&self) -> Vec<&[f64]> {
        self.tensors.iter().map(|t| t.as_slice()).collect()
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Self {
        Network { layers }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut x = input.to_vec();
        for layer in &self.layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &[f64]) -> Result<Trace> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = input.to_vec();
        for layer in &self.layers {
            let next = match layer {
                Layer::Dense(d) => {
                    let z = d.pre_activation(&x)?;
                    let out = d.activation.apply(&z);
                    pre.push(z);
                    out
                }
                Layer::PowerNormalize => {
                    pre.push(Vec::new());
                    power_normalize(&x)?
                }
            };
            inputs.push(std::mem::replace(&mut x, next));
        }
        Ok(Trace { inputs, pre, output: x })
    }

    /// Backpropagates `grad_output` (gradient w.r.t. the network output)
    /// through a recorded trace, adding parameter gradients into `grads`.
    /// Returns the gradient w.r.t. the network input.
    pub fn backward_into(&self, trace: &Trace, grad_output: &[f64], grads: &mut Gradients) -> Result<Vec<f64>> {
        let mut g = grad_output.to_vec();
        let mut tensor = 2 * self.dense_count();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &trace.inputs[i];
            g = match layer {
                Layer::PowerNormalize => power_normalize_backward(input, &g)?,
                Layer::Dense(d) => {
                    tensor -= 2;
                    let out = if i + 1 < self.layers.len() {
                        &trace.inputs[i + 1]
                    } else {
                        &trace.output
                    };
                    let gz = d.activation.backward(&trace.pre[i], out, &g);
                    let cols = d.inputs();
                    let gw = &mut grads.tensors[tensor];
                    for (r, &gzr) in gz.iter().enumerate() {
                        if gzr == 0.0 {
                            continue;
                        }
                        for (w, &xi) in gw[r * cols..(r + 1) * cols].iter_mut().zip(input) {
                            *w += gzr * xi;
                        }
                    }
                    for (b, &gzr) in grads.tensors[tensor + 1].iter_mut().zip(&gz) {
                        *b += gzr;
                    }
                    d.weights.matvec_transposed(&gz)?
                }
            };
        }
        Ok(g)
    }

    pub fn dense_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Dense(_))).count()
    }

    pub fn dense_layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::PowerNormalize => None,
        })
    }

    pub fn tensor_shapes(&self) -> Vec<usize> {
        self.dense_layers()
            .flat_map(|d| [d.weights.data().len(), d.bias.len()])
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensor_shapes().iter().sum()
    }

    /// Mutable parameter tensors in the same order as [`Gradients`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            if let Layer::Dense(d) = layer {
                out.push(d.weights.data_mut());
                out.push(d.bias.as_mut_slice());
            }
        }
        out
    }
}

/// Loss and parameter gradients of `network` on one example.
pub fn backward_pass(network: &Network, input: &[f64], target: &[f64], loss: LossKind) -> Result<(f64, Gradients)> {
    let trace = network.forward_trace(input)?;
    let value = loss_eval(loss, target, trace.output())?;
    let grad_out = loss_gradient(loss, target, trace.output())?;
    let mut grads = Gradients::zeros_like(network);
    network.backward_into(&trace, &grad_out, &mut grads)?;
    Ok((value, grads))
}
