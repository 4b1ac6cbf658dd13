use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{AxisKind, SnrAxis};
use crate::adaptive::{run_adaptive, AdaptiveState};
use crate::autoencoder::Autoencoder;
use crate::baseline::{simulate_baseline, BaselineScheme};
use crate::channel::{awgn_in_place, linear_to_db, ChannelSpec};
use crate::error::{Error, Result};
use crate::nn::{loss_eval, LossKind};
use crate::representation::{gray_bits, MessageId};
use crate::rng::{stream, SimRng};

/// Error events below which an estimate is flagged low-confidence.
pub const MIN_ERROR_EVENTS: u64 = 100;

const Z95: f64 = 1.959963984540054;

/// Half-width of the normal-approximation 95% interval for a proportion.
pub fn wald_ci95(events: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let p = events as f64 / trials as f64;
    Z95 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub scheme: String,
    pub size: usize,
    pub order: usize,
    pub channel_uses: usize,
    pub axis: AxisKind,
    pub snr_point: f64,
    pub sigma2: f64,
    /// Bits per channel use actually carried.
    pub rate: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bits_per_block: u32,
    pub bler: f64,
    pub ber: f64,
    pub bler_ci95: f64,
    pub ber_ci95: f64,
    pub mse: Option<f64>,
    pub mse_ci95: Option<f64>,
    pub low_confidence: bool,
    pub m1: Option<usize>,
    pub outage: Option<bool>,
}

impl MetricRecord {
    #[allow(clippy::too_many_arguments)]
    fn from_counts(
        scheme: &str,
        size: usize,
        order: usize,
        spec: &ChannelSpec,
        axis: AxisKind,
        snr_point: f64,
        bits_per_block: u32,
        blocks: u64,
        block_errors: u64,
        bit_errors: u64,
        mse: Option<(f64, f64)>,
    ) -> Self {
        let bits = blocks * bits_per_block as u64;
        Self {
            scheme: scheme.to_string(),
            size,
            order,
            channel_uses: spec.channel_uses,
            axis,
            snr_point,
            sigma2: spec.sigma2,
            rate: spec.rate,
            blocks,
            block_errors,
            bit_errors,
            bits_per_block,
            bler: block_errors as f64 / blocks as f64,
            ber: if bits == 0 {
                0.0
            } else {
                bit_errors as f64 / bits as f64
            },
            bler_ci95: wald_ci95(block_errors, blocks),
            ber_ci95: wald_ci95(bit_errors, bits.max(1)),
            mse: mse.map(|m| m.0),
            mse_ci95: mse.map(|m| m.1),
            low_confidence: block_errors < MIN_ERROR_EVENTS,
            m1: None,
            outage: None,
        }
    }

    /// Whether `other` is statistically compatible with this record, i.e. the
    /// BLER difference is within the combined 95% half-widths. Zero-error
    /// estimates use the rule-of-three bound `3/N` as their half-width.
    pub fn bler_compatible(&self, other: &MetricRecord) -> bool {
        (self.bler - other.bler).abs() <= self.bler_half_width() + other.bler_half_width()
    }

    pub fn bler_half_width(&self) -> f64 {
        if self.block_errors == 0 {
            3.0 / self.blocks as f64
        } else {
            self.bler_ci95
        }
    }

    pub fn ber_half_width(&self) -> f64 {
        let bits = (self.blocks * self.bits_per_block as u64).max(1);
        if self.bit_errors == 0 {
            3.0 / bits as f64
        } else {
            self.ber_ci95
        }
    }
}

fn scheme_of(model: &Autoencoder) -> &'static str {
    if model.codebook().is_onehot() {
        "onehot"
    } else {
        "gdr"
    }
}

/// Channel operating point for an axis value.
pub fn spec_for(kind: AxisKind, point: f64, channel_uses: usize, rate: f64) -> Result<ChannelSpec> {
    match kind {
        AxisKind::EbN0Db => ChannelSpec::from_ebn0(channel_uses, rate, point),
        AxisKind::SnrDb => ChannelSpec::from_snr_db(channel_uses, rate, point),
    }
}

struct Tally {
    block_errors: u64,
    bit_errors: u64,
    mse_sum: f64,
    mse_sq: f64,
}

fn run_blocks(
    model: &Autoencoder,
    spec: &ChannelSpec,
    allowed: Option<&[MessageId]>,
    blocks: u64,
    rng: &mut SimRng,
) -> Result<(Tally, u32)> {
    if blocks == 0 {
        return Err(Error::domain("at least one block is required"));
    }
    if spec.channel_uses != model.channel_uses() {
        return Err(Error::shape(format!(
            "channel spec has {} uses, model has {}",
            spec.channel_uses,
            model.channel_uses()
        )));
    }
    let tx = model.constellation()?;
    let entries = model.codebook().entries();
    let messages: Vec<MessageId> = match allowed {
        Some(a) => a.to_vec(),
        None => (0..entries.len()).map(MessageId).collect(),
    };
    if messages.is_empty() || !messages.len().is_power_of_two() {
        return Err(Error::domain(format!(
            "message set must have a power-of-two size, got {}",
            messages.len()
        )));
    }
    let k = messages.len().trailing_zeros();
    let gray: Vec<Vec<u8>> = (0..messages.len())
        .map(|i| gray_bits(MessageId(i), k))
        .collect::<Result<_>>()?;
    let position = |id: MessageId| messages.iter().position(|m| *m == id);
    let mut tally = Tally {
        block_errors: 0,
        bit_errors: 0,
        mse_sum: 0.0,
        mse_sq: 0.0,
    };
    let mut y = vec![0.0; spec.channel_uses];
    for _ in 0..blocks {
        let pos = rng.random_range(0..messages.len());
        let id = messages[pos];
        y.copy_from_slice(&tx[id.0]);
        awgn_in_place(&mut y, spec.sigma2, rng)?;
        let p = model.receive(&y)?;
        let decoded = match allowed {
            Some(a) => model.codebook().decode_within(&p, a)?,
            None => model.decode(&p)?,
        };
        if decoded != id {
            tally.block_errors += 1;
            // A decode outside the transmit set counts every bit as wrong.
            tally.bit_errors += match position(decoded) {
                Some(q) => gray[pos].iter().zip(&gray[q]).filter(|(a, b)| a != b).count() as u64,
                None => k as u64,
            };
        }
        let e = loss_eval(LossKind::Mse, &entries[id.0], &p)?;
        tally.mse_sum += e;
        tally.mse_sq += e * e;
    }
    Ok((tally, k))
}

fn finish(
    model: &Autoencoder,
    spec: &ChannelSpec,
    kind: AxisKind,
    point: f64,
    blocks: u64,
    tally: Tally,
    k: u32,
) -> MetricRecord {
    let n = blocks as f64;
    let mean = tally.mse_sum / n;
    let var = (tally.mse_sq / n - mean * mean).max(0.0);
    MetricRecord::from_counts(
        scheme_of(model),
        model.codebook().size(),
        model.codebook().order(),
        spec,
        kind,
        point,
        k,
        blocks,
        tally.block_errors,
        tally.bit_errors,
        Some((mean, Z95 * (var / n).sqrt())),
    )
}

/// BLER, gray-coded BER and reconstruction MSE over `blocks` uniformly drawn
/// messages.
pub fn estimate_bler(model: &Autoencoder, spec: &ChannelSpec, blocks: u64, rng: &mut SimRng) -> Result<MetricRecord> {
    let (tally, k) = run_blocks(model, spec, None, blocks, rng)?;
    let point = spec.snr_db();
    Ok(finish(model, spec, AxisKind::SnrDb, point, blocks, tally, k))
}

/// As [`estimate_bler`], transmitting uniformly over `allowed` and decoding
/// within it. Bits are gray codes of the position in `allowed`.
pub fn estimate_bler_within(
    model: &Autoencoder,
    spec: &ChannelSpec,
    allowed: &[MessageId],
    blocks: u64,
    rng: &mut SimRng,
) -> Result<MetricRecord> {
    let (tally, k) = run_blocks(model, spec, Some(allowed), blocks, rng)?;
    let mut rec = finish(model, spec, AxisKind::SnrDb, spec.snr_db(), blocks, tally, k);
    rec.rate = k as f64 / model.channel_uses() as f64;
    Ok(rec)
}

/// Evaluates every axis point on its own generator stream `(seed, index)`.
pub fn sweep_model(model: &Autoencoder, axis: &SnrAxis, blocks: u64, seed: u64) -> Result<Vec<MetricRecord>> {
    axis.points
        .par_iter()
        .enumerate()
        .map(|(i, &point)| {
            let spec = spec_for(axis.kind, point, model.channel_uses(), model.rate())?;
            let mut rng = stream(seed, i as u64);
            let (tally, k) = run_blocks(model, &spec, None, blocks, &mut rng)?;
            Ok(finish(model, &spec, axis.kind, point, blocks, tally, k))
        })
        .collect()
}

/// Subset transmission sweep; `subsets[i]` applies at `axis.points[i]`.
pub fn sweep_model_within(
    model: &Autoencoder,
    axis: &SnrAxis,
    subsets: &[Vec<MessageId>],
    blocks: u64,
    seed: u64,
) -> Result<Vec<MetricRecord>> {
    if subsets.len() != axis.points.len() {
        return Err(Error::shape("one subset per axis point is required"));
    }
    axis.points
        .par_iter()
        .zip(subsets)
        .enumerate()
        .map(|(i, (&point, subset))| {
            let rate = (subset.len() as f64).log2() / model.channel_uses() as f64;
            let spec = spec_for(axis.kind, point, model.channel_uses(), rate)?;
            let mut rng = stream(seed, i as u64);
            let (tally, k) = run_blocks(model, &spec, Some(subset), blocks, &mut rng)?;
            Ok(finish(model, &spec, axis.kind, point, blocks, tally, k))
        })
        .collect()
}

/// Adaptive selection followed by subset transmission at every SNR point.
/// Probing and evaluation share the point's stream `(seed, index)`.
pub fn sweep_adaptive(
    model: &Autoencoder,
    axis: &SnrAxis,
    threshold: f64,
    probes: usize,
    blocks: u64,
    seed: u64,
) -> Result<Vec<(AdaptiveState, MetricRecord)>> {
    let scheme = if model.codebook().is_onehot() {
        "adaptive"
    } else {
        "adaptive_gdr"
    };
    axis.points
        .par_iter()
        .enumerate()
        .map(|(i, &point)| {
            let mut rng = stream(seed, i as u64);
            let probe_seed = rng.random::<u64>();
            let probe_spec = spec_for(axis.kind, point, model.channel_uses(), model.rate())?;
            let (state, rate) = run_adaptive(model, &probe_spec, threshold, probes, probe_seed)?;
            // Same physical channel as the probes; only the carried rate changes.
            let spec = ChannelSpec {
                rate,
                ebn0_db: linear_to_db(1.0 / (2.0 * rate * probe_spec.sigma2)),
                ..probe_spec
            };
            let (tally, k) = run_blocks(model, &spec, Some(&state.feedback_labels), blocks, &mut rng)?;
            let mut rec = finish(model, &spec, axis.kind, point, blocks, tally, k);
            rec.scheme = scheme.to_string();
            rec.m1 = Some(state.m1);
            rec.outage = Some(state.outage);
            Ok((state, rec))
        })
        .collect()
}

/// Hamming/BPSK estimate at one axis point. SNR points are converted with
/// the scheme's rate, `Eb/N0 = SNR − 10·log₁₀(2R)`.
pub fn estimate_baseline(
    scheme: BaselineScheme,
    kind: AxisKind,
    point: f64,
    blocks: u64,
    rng: &mut SimRng,
) -> Result<MetricRecord> {
    let rate = scheme.rate();
    let ebn0 = match kind {
        AxisKind::EbN0Db => point,
        AxisKind::SnrDb => point - 10.0 * (2.0 * rate).log10(),
    };
    let uses = if scheme == BaselineScheme::UncodedBpsk { 4 } else { 7 };
    let spec = ChannelSpec::from_ebn0(uses, rate, ebn0)?;
    let c = simulate_baseline(scheme, ebn0, blocks, rng)?;
    Ok(MetricRecord::from_counts(
        scheme.name(),
        16,
        1,
        &spec,
        kind,
        point,
        4,
        c.blocks,
        c.block_errors,
        c.bit_errors,
        None,
    ))
}

pub fn sweep_baseline(scheme: BaselineScheme, axis: &SnrAxis, blocks: u64, seed: u64) -> Result<Vec<MetricRecord>> {
    axis.points
        .par_iter()
        .enumerate()
        .map(|(i, &point)| estimate_baseline(scheme, axis.kind, point, blocks, &mut stream(seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{build_model, TrainingConfig};
    use crate::representation::{build_gdr, build_onehot};
    use crate::rng::seeded;

    fn small_trained() -> Autoencoder {
        let mut model = build_model(build_onehot(8).unwrap(), 7, 2).unwrap();
        let config = TrainingConfig {
            epochs: 20,
            train_samples: 4000,
            ..TrainingConfig::default()
        };
        model.train(&config).unwrap();
        model
    }

    #[test]
    fn noiseless_trained_model_is_error_free() {
        let model = small_trained();
        let spec = ChannelSpec::noiseless(7, model.rate());
        let r = estimate_bler(&model, &spec, 10_000, &mut seeded(1)).unwrap();
        assert_eq!(r.block_errors, 0);
        assert!(r.low_confidence);
    }

    #[test]
    fn untrained_model_decodes_at_chance() {
        let model = build_model(build_onehot(8).unwrap(), 7, 4).unwrap();
        let spec = ChannelSpec::from_snr_db(7, model.rate(), -30.0).unwrap();
        let r = estimate_bler(&model, &spec, 20_000, &mut seeded(2)).unwrap();
        let chance = 1.0 - 1.0 / 8.0;
        assert!((r.bler - chance).abs() < 2.0 * r.bler_ci95 + 0.01, "{}", r.bler);
    }

    #[test]
    fn ci_shrinks_with_root_n() {
        let model = build_model(build_onehot(8).unwrap(), 7, 4).unwrap();
        let spec = ChannelSpec::from_snr_db(7, model.rate(), 0.0).unwrap();
        let a = estimate_bler(&model, &spec, 20_000, &mut seeded(3)).unwrap();
        let b = estimate_bler(&model, &spec, 40_000, &mut seeded(4)).unwrap();
        let ratio = b.bler_ci95 / a.bler_ci95;
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.1 * 0.5f64.sqrt(), "{ratio}");
        // Doubling the sample count twice halves the width.
        let c = estimate_bler(&model, &spec, 80_000, &mut seeded(5)).unwrap();
        assert!((c.bler_ci95 / a.bler_ci95 - 0.5).abs() < 0.05);
    }

    #[test]
    fn ber_is_bounded_by_bler() {
        let model = build_model(build_gdr(8, 3).unwrap(), 7, 4).unwrap();
        let spec = ChannelSpec::from_snr_db(7, model.rate(), 0.0).unwrap();
        let r = estimate_bler(&model, &spec, 5_000, &mut seeded(6)).unwrap();
        let k = r.bits_per_block as f64;
        assert!(r.ber <= r.bler + 1e-15);
        assert!(r.bler <= k * r.ber + 1e-15);
    }

    #[test]
    fn sweeps_are_order_independent() {
        let model = small_trained();
        let axis = SnrAxis {
            kind: AxisKind::EbN0Db,
            points: vec![0.0, 3.0, 6.0],
        };
        let all = sweep_model(&model, &axis, 2_000, 9).unwrap();
        let single = sweep_model(
            &model,
            &SnrAxis {
                kind: AxisKind::EbN0Db,
                points: vec![0.0, 3.0, 6.0],
            },
            2_000,
            9,
        )
        .unwrap();
        assert_eq!(all, single);
        let spec = spec_for(AxisKind::EbN0Db, 3.0, 7, model.rate()).unwrap();
        let direct = estimate_bler(&model, &spec, 2_000, &mut stream(9, 1)).unwrap();
        assert_eq!(direct.block_errors, all[1].block_errors);
    }

    #[test]
    fn subset_transmission_uses_subset_rate() {
        let model = small_trained();
        let subset = vec![MessageId(1), MessageId(4), MessageId(6), MessageId(7)];
        let spec = ChannelSpec::from_snr_db(7, 2.0 / 7.0, 0.0).unwrap();
        let r = estimate_bler_within(&model, &spec, &subset, 5_000, &mut seeded(1)).unwrap();
        assert_eq!(r.bits_per_block, 2);
        assert!((r.rate - 2.0 / 7.0).abs() < 1e-15);
        assert!(estimate_bler_within(&model, &spec, &subset[..3], 10, &mut seeded(1)).is_err());
    }

    #[test]
    fn baseline_axis_conversion() {
        let a = estimate_baseline(BaselineScheme::HammingMl, AxisKind::EbN0Db, 3.0, 1000, &mut seeded(1)).unwrap();
        let snr = 3.0 + 10.0 * (8.0f64 / 7.0).log10();
        let b = estimate_baseline(BaselineScheme::HammingMl, AxisKind::SnrDb, snr, 1000, &mut seeded(1)).unwrap();
        assert!((a.sigma2 - b.sigma2).abs() < 1e-12);
        assert_eq!(a.bit_errors, b.bit_errors);
    }

    #[test]
    fn wald_interval() {
        assert_eq!(wald_ci95(0, 100), 0.0);
        assert!((wald_ci95(50, 100) - 1.96 * 0.05).abs() < 1e-3);
    }
}
