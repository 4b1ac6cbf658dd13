//! Minimal dense-network engine.
//!
//! Everything runs in `f64` on plain vectors: the networks in this crate have
//! at most a few thousand parameters, and exact arithmetic makes gradient
//! checking straightforward.

mod adam;
mod layer;
mod loss;
mod matrix;
mod network;

pub use adam::{AdamConfig, AdamState};
pub use layer::{power_normalize, power_normalize_backward, softmax, Activation, DenseLayer, DEGENERATE_NORM};
pub use loss::{loss_eval, loss_gradient, LossKind};
pub use matrix::Matrix;
pub use network::{backward_pass, Gradients, Layer, Network, Trace};
