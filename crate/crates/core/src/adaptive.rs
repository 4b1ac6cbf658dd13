//! Adaptive transmit-vector selection.
//!
//! 1. Every codebook entry is sent through the trained link `K` times at the
//!    operating SNR and its mean reconstruction error `‖s − p‖²` recorded.
//! 2. The receiver feeds back the labels of the `M₁` entries with the smallest
//!    error, where `M₁ ∈ {4, 8, 16, 32, 64}` is the largest tier whose whole
//!    MSE-sorted prefix meets the threshold.
//! 3. The transmitter then signals over that subset only, at rate
//!    `log₂(M₁)/n`.
//!
//! The feedback link is error-free. When not even four entries meet the
//! threshold the state falls back to `M₁ = 4` with the outage flag set.

use rayon::prelude::*;

use crate::autoencoder::Autoencoder;
use crate::channel::{awgn_in_place, ChannelSpec};
use crate::error::{Error, Result};
use crate::nn::{loss_eval, LossKind};
use crate::representation::MessageId;
use crate::rng::stream;

pub const TIERS: [usize; 5] = [4, 8, 16, 32, 64];

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState {
    pub mse_threshold: f64,
    pub probe_mses: Vec<f64>,
    /// Selected entries, ordered by increasing probe MSE.
    pub feedback_labels: Vec<MessageId>,
    pub m1: usize,
    pub outage: bool,
    pub probes_per_vector: usize,
}

impl AdaptiveState {
    /// `log₂(M₁)/n`
    pub fn rate(&self, channel_uses: usize) -> f64 {
        (self.m1 as f64).log2() / channel_uses as f64
    }

    pub fn bits_per_message(&self) -> u32 {
        self.m1.trailing_zeros()
    }
}

/// Mean `‖sᵢ − pᵢ‖²` over `probes` noisy transmissions of every entry. Entry
/// `i` uses generator stream `i` of `seed`.
pub fn probe_mses(model: &Autoencoder, spec: &ChannelSpec, probes: usize, seed: u64) -> Result<Vec<f64>> {
    if probes == 0 {
        return Err(Error::domain("at least one probe per vector is required"));
    }
    let tx = model.constellation()?;
    let entries = model.codebook().entries();
    (0..entries.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut total = 0.0;
            for _ in 0..probes {
                let mut y = tx[i].clone();
                awgn_in_place(&mut y, spec.sigma2, &mut rng)?;
                let p = model.receive(&y)?;
                total += loss_eval(LossKind::Mse, &entries[i], &p)?;
            }
            Ok(total / probes as f64)
        })
        .collect()
}

/// Picks the largest admissible tier; ties in MSE go to the lower index.
pub fn select_vectors(probe_mses: &[f64], threshold: f64, probes_per_vector: usize) -> Result<AdaptiveState> {
    if probe_mses.len() < TIERS[0] {
        return Err(Error::domain(format!(
            "adaptive selection needs at least {} entries, got {}",
            TIERS[0],
            probe_mses.len()
        )));
    }
    let mut order: Vec<usize> = (0..probe_mses.len()).collect();
    order.sort_by(|&a, &b| probe_mses[a].total_cmp(&probe_mses[b]).then(a.cmp(&b)));
    let feasible = order.iter().take_while(|&&i| probe_mses[i] <= threshold).count();
    let tier = TIERS
        .iter()
        .copied()
        .filter(|&t| t <= probe_mses.len() && t <= feasible)
        .max();
    let (m1, outage) = match tier {
        Some(t) => (t, false),
        None => (TIERS[0], true),
    };
    Ok(AdaptiveState {
        mse_threshold: threshold,
        probe_mses: probe_mses.to_vec(),
        feedback_labels: order[..m1].iter().map(|&i| MessageId(i)).collect(),
        m1,
        outage,
        probes_per_vector,
    })
}

/// Probe, select and report the resulting rate `log₂(M₁)/n`.
pub fn run_adaptive(
    model: &Autoencoder,
    spec: &ChannelSpec,
    threshold: f64,
    probes: usize,
    seed: u64,
) -> Result<(AdaptiveState, f64)> {
    let mses = probe_mses(model, spec, probes, seed)?;
    let state = select_vectors(&mses, threshold, probes)?;
    let rate = state.rate(model.channel_uses());
    Ok((state, rate))
}

/// Same mechanics over a 64-entry generalized codebook (e.g. M=8, m=4).
pub fn run_adaptive_gdr(
    model: &Autoencoder,
    spec: &ChannelSpec,
    threshold: f64,
    probes: usize,
    seed: u64,
) -> Result<(AdaptiveState, f64)> {
    let cb = model.codebook();
    if cb.is_onehot() || cb.len() != 64 {
        return Err(Error::domain(format!(
            "adaptive GDR needs a 64-entry order>1 codebook, got M={} m={} ({} entries)",
            cb.size(),
            cb.order(),
            cb.len()
        )));
    }
    run_adaptive(model, spec, threshold, probes, seed)
}
