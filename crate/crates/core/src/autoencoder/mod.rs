//! The end-to-end model: transmitter, AWGN channel, receiver.
//!
//! Transmitter: `Dense(M→M, relu) → Dense(M→n, linear) → l2 power
//! normalization`. Receiver: `Dense(n→M, relu) → Dense(M→M, softmax)`.

mod checkpoint;
mod train;

use std::fmt;

use crate::channel::awgn_in_place;
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Layer, Network};
use crate::representation::{Codebook, MessageId};
use crate::rng::seeded;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use train::{train, TrainingConfig, TrainingSnr, TrainingTrace};

/// Per-layer parameter counts for vector size `M` and `n` channel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCounts {
    /// Both transmitter dense layers, `(M+1)(M+n)`.
    pub dense: usize,
    /// `2n` for a learnable scale/shift normalization; zero for l2.
    pub normalization: usize,
    /// Receiver relu layer, `M(n+1)`.
    pub relu: usize,
    /// Receiver softmax layer, `M(M+1)`.
    pub softmax: usize,
    pub total: usize,
}

impl fmt::Display for ParamCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dense={} normalization={} relu={} softmax={} total={}",
            self.dense, self.normalization, self.relu, self.softmax, self.total
        )
    }
}

/// Parameter accounting with a `2n`-parameter normalization layer, total
/// `(2M+3)(M+n)`.
pub fn theoretical_param_count(size: usize, channel_uses: usize) -> ParamCounts {
    let (m, n) = (size, channel_uses);
    let dense = (m + 1) * (m + n);
    let normalization = 2 * n;
    let relu = m * (n + 1);
    let softmax = m * (m + 1);
    ParamCounts {
        dense,
        normalization,
        relu,
        softmax,
        total: dense + normalization + relu + softmax,
    }
}

/// Hidden quantities of one receiver pass, used by the analysis module.
#[derive(Debug, Clone)]
pub struct ReceiverPass {
    /// `W_r·y + b_r`
    pub relu_pre: Vec<f64>,
    /// `max(W_r·y + b_r, 0)`
    pub relu_out: Vec<f64>,
    /// Softmax input `W_s·u + b_s`.
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    codebook: Codebook,
    channel_uses: usize,
    seed: u64,
    pub(crate) transmitter: Network,
    pub(crate) receiver: Network,
    pub(crate) training: Option<TrainingConfig>,
}

const MAX_INIT_ATTEMPTS: usize = 1000;

/// Fresh model with Glorot-uniform weights drawn from `seed`.
pub fn build_model(codebook: Codebook, channel_uses: usize, seed: u64) -> Result<Autoencoder> {
    if channel_uses < 1 {
        return Err(Error::domain("channel uses must be at least 1"));
    }
    if codebook.is_empty() {
        return Err(Error::domain("empty codebook"));
    }
    let m = codebook.size();
    let n = channel_uses;
    let mut rng = seeded(seed);
    // A draw where some entry switches off every hidden unit leaves that
    // entry with a zero transmit vector; such draws are replaced.
    let mut attempts = 0;
    let transmitter = loop {
        let candidate = Network::new(vec![
            Layer::Dense(DenseLayer::glorot(m, m, Activation::Relu, &mut rng)),
            Layer::Dense(DenseLayer::glorot(m, n, Activation::Linear, &mut rng)),
            Layer::PowerNormalize,
        ]);
        if codebook.entries().iter().all(|s| candidate.forward(s).is_ok()) {
            break candidate;
        }
        attempts += 1;
        if attempts == MAX_INIT_ATTEMPTS {
            return Err(Error::Degenerate(format!(
                "no live transmitter initialization in {MAX_INIT_ATTEMPTS} draws for seed {seed}"
            )));
        }
    };
    let receiver = Network::new(vec![
        Layer::Dense(DenseLayer::glorot(n, m, Activation::Relu, &mut rng)),
        Layer::Dense(DenseLayer::glorot(m, m, Activation::Softmax, &mut rng)),
    ]);
    Ok(Autoencoder {
        codebook,
        channel_uses,
        seed,
        transmitter,
        receiver,
        training: None,
    })
}

impl Autoencoder {
    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn channel_uses(&self) -> usize {
        self.channel_uses
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn training_config(&self) -> Option<&TrainingConfig> {
        self.training.as_ref()
    }

    pub fn transmitter(&self) -> &Network {
        &self.transmitter
    }

    pub fn receiver(&self) -> &Network {
        &self.receiver
    }

    /// Bits per channel use of the full codebook.
    pub fn rate(&self) -> f64 {
        crate::representation::data_rate(&self.codebook, self.channel_uses)
    }

    /// Actual trainable parameter count (l2 normalization has none).
    pub fn parameter_count(&self) -> usize {
        self.transmitter.parameter_count() + self.receiver.parameter_count()
    }

    /// Receiver relu layer (`W_r`, `b_r`).
    pub fn receiver_relu(&self) -> &DenseLayer {
        self.receiver.dense_layers().next().expect("fixed architecture")
    }

    /// Receiver softmax layer.
    pub fn receiver_softmax(&self) -> &DenseLayer {
        self.receiver.dense_layers().nth(1).expect("fixed architecture")
    }

    /// Power-normalized transmit block for a message.
    pub fn transmit(&self, id: MessageId) -> Result<Vec<f64>> {
        self.transmitter.forward(self.codebook.entry(id))
    }

    /// Transmit blocks for every codebook entry, in message order.
    pub fn constellation(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.codebook.len()).map(|i| self.transmit(MessageId(i))).collect()
    }

    /// Receiver probability vector for a received block.
    pub fn receive(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.receiver.forward(y)
    }

    pub fn receive_detailed(&self, y: &[f64]) -> Result<ReceiverPass> {
        let relu = self.receiver_relu();
        let soft = self.receiver_softmax();
        let relu_pre = relu.pre_activation(y)?;
        let relu_out = Activation::Relu.apply(&relu_pre);
        let logits = soft.pre_activation(&relu_out)?;
        let probabilities = Activation::Softmax.apply(&logits);
        Ok(ReceiverPass {
            relu_pre,
            relu_out,
            logits,
            probabilities,
        })
    }

    pub fn decode(&self, p: &[f64]) -> Result<MessageId> {
        self.codebook.decode_top_m(p)
    }

    /// One block through transmitter, channel and receiver.
    pub fn simulate<R: rand::Rng + ?Sized>(&self, id: MessageId, sigma2: f64, rng: &mut R) -> Result<Vec<f64>> {
        let mut y = self.transmit(id)?;
        awgn_in_place(&mut y, sigma2, rng)?;
        self.receive(&y)
    }

    /// Errors unless the model was built for this `M`, `m` and `n`.
    pub fn ensure_dimensions(&self, size: usize, order: usize, channel_uses: usize) -> Result<()> {
        if self.codebook.size() != size || self.codebook.order() != order || self.channel_uses != channel_uses {
            return Err(crate::error::CheckpointError::DimensionMismatch(format!(
                "model has M={} m={} n={}, experiment expects M={size} m={order} n={channel_uses}",
                self.codebook.size(),
                self.codebook.order(),
                self.channel_uses
            ))
            .into());
        }
        Ok(())
    }

    /// FNV-1a over the bit patterns of every parameter.
    pub fn parameter_checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for net in [&self.transmitter, &self.receiver] {
            for d in net.dense_layers() {
                for v in d.weights.data().iter().chain(&d.bias) {
                    for byte in v.to_bits().to_le_bytes() {
                        h ^= byte as u64;
                        h = h.wrapping_mul(0x0000_0100_0000_01b3);
                    }
                }
            }
        }
        h
    }
}
