use std::time::{Duration, Instant};

use rand::Rng;

use super::Autoencoder;
use crate::channel::{awgn_in_place, snr_db_to_sigma2};
use crate::error::{Error, Result};
use crate::nn::{loss_eval, loss_gradient, AdamConfig, AdamState, Gradients, LossKind};
use crate::rng::seeded;

/// Noise level(s) seen during offline training, as `SNR = 1/σ²` in dB.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainingSnr {
    Fixed(f64),
    /// Each training sample draws its SNR uniformly from the set.
    Set(Vec<f64>),
}

impl TrainingSnr {
    pub fn describe(&self) -> String {
        match self {
            TrainingSnr::Fixed(db) => format!("{db}"),
            TrainingSnr::Set(set) => {
                let parts: Vec<String> = set.iter().map(|v| v.to_string()).collect();
                format!("{{{}}}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub train_samples: usize,
    /// Evaluation block count echoed into outputs; not used by training.
    pub test_samples: usize,
    pub loss: LossKind,
    pub snr: TrainingSnr,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 150,
            batch_size: 45,
            train_samples: 20_000,
            test_samples: 1_000_000,
            loss: LossKind::Mse,
            snr: TrainingSnr::Fixed(10.0),
            seed: 1,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainingConfig {
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr = TrainingSnr::Fixed(snr_db);
        self
    }

    pub fn with_snr_set(mut self, set: Vec<f64>) -> Self {
        self.snr = TrainingSnr::Set(set);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("train_samples", self.train_samples),
            ("test_samples", self.test_samples),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        match &self.snr {
            TrainingSnr::Set(set) if set.is_empty() => Err(Error::config("training_snr_set_db", "empty set")),
            TrainingSnr::Set(set) if set.iter().any(|v| !v.is_finite()) => {
                Err(Error::config("training_snr_set_db", "non-finite entry"))
            }
            TrainingSnr::Fixed(v) if !v.is_finite() => Err(Error::config("training_snr_db", "not finite")),
            _ => Ok(()),
        }
    }

    /// Adam steps per epoch, including a final short batch.
    pub fn steps_per_epoch(&self) -> usize {
        self.train_samples.div_ceil(self.batch_size)
    }
}

#[derive(Debug, Clone)]
pub struct TrainingTrace {
    /// Mean per-sample loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub wall_time: Duration,
    pub checksum: u64,
}

impl PartialEq for TrainingTrace {
    /// Wall time is excluded.
    fn eq(&self, other: &Self) -> bool {
        self.checksum == other.checksum
            && self.epoch_losses.len() == other.epoch_losses.len()
            && self
                .epoch_losses
                .iter()
                .zip(&other.epoch_losses)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl TrainingTrace {
    /// Final loss at most half the first-epoch loss.
    pub fn loss_dropped(&self) -> bool {
        match (self.epoch_losses.first(), self.epoch_losses.last()) {
            (Some(first), Some(last)) => *last <= 0.5 * first,
            _ => false,
        }
    }

    /// Over the last `window` epochs the loss is flat or falling: the mean of
    /// the final tenth of the window stays within `1 + band` of the mean of
    /// its first tenth.
    pub fn settled(&self, window: usize, band: f64) -> bool {
        let n = self.epoch_losses.len();
        if n < window || window < 10 {
            return false;
        }
        let w = &self.epoch_losses[n - window..];
        let k = window / 10;
        let head = w[..k].iter().sum::<f64>() / k as f64;
        let tail = w[window - k..].iter().sum::<f64>() / k as f64;
        tail <= head * (1.0 + band)
    }

    /// Convergence smoke test: the loss fell by half and settled over the last
    /// 50 epochs within a 10% band.
    pub fn converged(&self) -> bool {
        self.loss_dropped() && self.settled(50.min(self.epoch_losses.len()), 0.10)
    }
}

/// Offline training with Adam on uniformly drawn messages and fresh noise for
/// every presentation.
pub fn train(model: &mut Autoencoder, config: &TrainingConfig) -> Result<TrainingTrace> {
    config.validate()?;
    let started = Instant::now();
    let mut rng = seeded(config.seed);

    let sigmas: Vec<f64> = match &config.snr {
        TrainingSnr::Fixed(db) => vec![snr_db_to_sigma2(*db)],
        TrainingSnr::Set(set) => set.iter().map(|db| snr_db_to_sigma2(*db)).collect(),
    };

    let shapes: Vec<usize> = model
        .transmitter
        .tensor_shapes()
        .into_iter()
        .chain(model.receiver.tensor_shapes())
        .collect();
    let mut adam = AdamState::new(config.adam, &shapes);
    let mut tx_grads = Gradients::zeros_like(&model.transmitter);
    let mut rx_grads = Gradients::zeros_like(&model.receiver);
    let messages = model.codebook.len();

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let mut loss_sum = 0.0;
        let mut remaining = config.train_samples;
        while remaining > 0 {
            let batch = remaining.min(config.batch_size);
            remaining -= batch;
            for t in tx_grads.tensors.iter_mut().chain(rx_grads.tensors.iter_mut()) {
                t.fill(0.0);
            }
            for _ in 0..batch {
                let msg = rng.random_range(0..messages);
                let sigma2 = if sigmas.len() == 1 {
                    sigmas[0]
                } else {
                    sigmas[rng.random_range(0..sigmas.len())]
                };
                let target = &model.codebook.entries()[msg];
                let tx = match model.transmitter.forward_trace(target) {
                    Err(Error::Degenerate(_)) if !params_finite(model) => {
                        return Err(Error::TrainingDiverged { epoch, loss: f64::NAN })
                    }
                    other => other?,
                };
                let mut y = tx.output().to_vec();
                awgn_in_place(&mut y, sigma2, &mut rng)?;
                let rx = model.receiver.forward_trace(&y)?;
                loss_sum += loss_eval(config.loss, target, rx.output())?;
                let g_out = loss_gradient(config.loss, target, rx.output())?;
                // The channel is additive, so ∂L/∂x = ∂L/∂y.
                let g_y = model.receiver.backward_into(&rx, &g_out, &mut rx_grads)?;
                model.transmitter.backward_into(&tx, &g_y, &mut tx_grads)?;
            }
            let inv = 1.0 / batch as f64;
            tx_grads.scale(inv);
            rx_grads.scale(inv);
            let grads: Vec<&[f64]> = tx_grads.as_slices().into_iter().chain(rx_grads.as_slices()).collect();
            let mut params: Vec<&mut [f64]> = model.transmitter.tensors_mut();
            params.extend(model.receiver.tensors_mut());
            adam.step(&mut params, &grads)?;
        }
        let mean = loss_sum / config.train_samples as f64;
        if !mean.is_finite() {
            return Err(Error::TrainingDiverged { epoch, loss: mean });
        }
        epoch_losses.push(mean);
    }

    model.training = Some(config.clone());
    Ok(TrainingTrace {
        epoch_losses,
        wall_time: started.elapsed(),
        checksum: model.parameter_checksum(),
    })
}

fn params_finite(model: &Autoencoder) -> bool {
    [&model.transmitter, &model.receiver].iter().all(|net| {
        net.dense_layers()
            .all(|d| d.weights.data().iter().chain(&d.bias).all(|v| v.is_finite()))
    })
}

impl Autoencoder {
    pub fn train(&mut self, config: &TrainingConfig) -> Result<TrainingTrace> {
        train(self, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::build_model;
    use crate::representation::{build_onehot, MessageId};

    fn quick(epochs: usize) -> TrainingConfig {
        TrainingConfig {
            epochs,
            train_samples: 2000,
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = TrainingConfig::default();
        assert_eq!(
            (c.epochs, c.batch_size, c.train_samples, c.test_samples),
            (150, 45, 20_000, 1_000_000)
        );
        assert_eq!(c.loss, LossKind::Mse);
        assert_eq!(c.steps_per_epoch(), 445);
    }

    #[test]
    fn replay_is_exact() {
        let cb = build_onehot(4).unwrap();
        let mut a = build_model(cb.clone(), 7, 2).unwrap();
        let mut b = build_model(cb, 7, 2).unwrap();
        let ta = a.train(&quick(3)).unwrap();
        let tb = b.train(&quick(3)).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a, b);
    }

    #[test]
    fn small_model_learns_noiseless_mapping() {
        let mut model = build_model(build_onehot(4).unwrap(), 7, 2).unwrap();
        let trace = model.train(&quick(20).with_snr_db(10.0)).unwrap();
        assert!(trace.epoch_losses.last().unwrap() < &trace.epoch_losses[0]);
        for i in 0..4 {
            let p = model.receive(&model.transmit(MessageId(i)).unwrap()).unwrap();
            assert_eq!(model.decode(&p).unwrap(), MessageId(i));
        }
    }

    #[test]
    fn snr_set_and_cross_entropy_train() {
        let mut model = build_model(build_onehot(4).unwrap(), 7, 2).unwrap();
        let mut cfg = quick(2).with_snr_set(vec![0.0, 10.0, 20.0]);
        cfg.loss = LossKind::CategoricalCrossEntropy;
        let trace = model.train(&cfg).unwrap();
        assert_eq!(trace.epoch_losses.len(), 2);
        assert!(trace.epoch_losses.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn invalid_config() {
        let mut model = build_model(build_onehot(4).unwrap(), 7, 2).unwrap();
        let cfg = TrainingConfig {
            batch_size: 0,
            ..quick(1)
        };
        assert!(matches!(model.train(&cfg), Err(Error::Config { .. })));
        let cfg = quick(1).with_snr_set(vec![]);
        assert!(model.train(&cfg).is_err());
    }

    #[test]
    fn diverging_learning_rate_is_reported() {
        let mut model = build_model(build_onehot(4).unwrap(), 7, 2).unwrap();
        let mut cfg = quick(3);
        cfg.adam.learning_rate = f64::INFINITY;
        match model.train(&cfg) {
            Err(Error::TrainingDiverged { epoch, .. }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn smoke_test_shapes() {
        let flat = TrainingTrace {
            epoch_losses: vec![0.8; 150],
            wall_time: Duration::ZERO,
            checksum: 0,
        };
        assert!(!flat.converged());
        let falling = TrainingTrace {
            epoch_losses: (0..150).map(|i| 1.0 / (1.0 + i as f64)).collect(),
            wall_time: Duration::ZERO,
            checksum: 0,
        };
        assert!(falling.converged());
    }
}
