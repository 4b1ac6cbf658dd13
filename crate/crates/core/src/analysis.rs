//! Linearized receiver analysis and achievable-rate curves.
//!
//! The softmax output is approximated as `p ≈ F·u` with diagonal
//!
//! ```text
//! f_ii = (1/Σₖ e^{u_k}) · (u_i⁻¹ + 1 + u_i/2! + … + u_i^{N−1}/N!)
//! ```
//!
//! Inside a fixed relu activity region the receiver logits are an affine
//! function of the channel output, `u₊ = W·y + b` with `W = W_s·D·W_h` and
//! `b = W_s·D·b_h + b_s` (`D` selects the non-zero hidden units). Building
//! `F₊` at each entry's noiseless logits, the mean squared error splits into
//! `E‖F₊(W·x + b) − s‖² + ‖F₊W‖²_F·σ²`.
//!
//! `F` is exact at its reference point but is a secant through the origin,
//! not a tangent. On saturated softmax outputs the noise term overstates the
//! true sensitivity, and for `|u|` well beyond the series' comfort zone the
//! truncated signal term is dominated by truncation error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoder::Autoencoder;
use crate::channel::{awgn_in_place, db_to_linear};
use crate::error::{Error, Result};
use crate::nn::{loss_eval, LossKind, Matrix};
use crate::representation::{bits_for, MessageId};
use crate::rng::SimRng;

pub const DEFAULT_TAYLOR_ORDER: usize = 20;
pub const DEFAULT_U_MIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedReceiver {
    /// Diagonal of `F`.
    pub diagonal: Vec<f64>,
    pub taylor_order: usize,
    /// Reference activation the diagonal was built from.
    pub reference: Vec<f64>,
}

impl LinearizedReceiver {
    /// `F` as a dense matrix; off-diagonal entries are exactly zero.
    pub fn matrix(&self) -> Matrix {
        let m = self.diagonal.len();
        let mut f = Matrix::zeros(m, m);
        for (i, d) in self.diagonal.iter().enumerate() {
            f.data_mut()[i * m + i] = *d;
        }
        f
    }

    /// `F·u`
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.diagonal.len() {
            return Err(Error::shape(format!(
                "activation has {} entries, F is {}x{}",
                u.len(),
                self.diagonal.len(),
                self.diagonal.len()
            )));
        }
        Ok(self.diagonal.iter().zip(u).map(|(f, x)| f * x).collect())
    }
}

pub fn build_f(u: &[f64], taylor_order: usize) -> Result<LinearizedReceiver> {
    build_f_with_floor(u, taylor_order, DEFAULT_U_MIN)
}

pub fn build_f_with_floor(u: &[f64], taylor_order: usize, u_min: f64) -> Result<LinearizedReceiver> {
    if taylor_order == 0 {
        return Err(Error::domain("taylor order must be at least 1"));
    }
    if u.is_empty() {
        return Err(Error::shape("activation vector is empty"));
    }
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("activation {i} is not finite")));
    }
    if let Some(i) = u.iter().position(|v| v.abs() < u_min) {
        return Err(Error::Singular {
            index: i,
            value: u[i],
            floor: u_min,
        });
    }
    let peak = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Σₖ e^{u_k} is factored as e^{peak}·Σₖ e^{u_k − peak} to stay finite.
    let shifted: f64 = u.iter().map(|v| (v - peak).exp()).sum();
    let diagonal = u
        .iter()
        .map(|&x| {
            // u⁻¹ + Σ_{k=1}^{N} u^{k−1}/k!
            let mut term = 1.0;
            let mut series = 1.0 / x;
            for k in 1..=taylor_order {
                term /= k as f64;
                series += term;
                term *= x;
            }
            series * (-peak).exp() / shifted
        })
        .collect();
    Ok(LinearizedReceiver {
        diagonal,
        taylor_order,
        reference: u.to_vec(),
    })
}

/// Affine map from channel output to receiver logits inside one relu
/// activity region: `W = W_s·D·W_h`, `b = W_s·D·b_h + b_s` with `D` the 0/1
/// diagonal of active hidden units.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionAffine {
    pub active: Vec<bool>,
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl RegionAffine {
    pub fn logits(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut u = self.weights.matvec(y)?;
        for (v, b) in u.iter_mut().zip(&self.bias) {
            *v += b;
        }
        Ok(u)
    }
}

/// Activity pattern of the receiver relu layer at channel output `y`.
pub fn activity(model: &Autoencoder, y: &[f64]) -> Result<Vec<bool>> {
    Ok(model
        .receiver_relu()
        .pre_activation(y)?
        .iter()
        .map(|v| *v > 0.0)
        .collect())
}

pub fn region_affine(model: &Autoencoder, active: &[bool]) -> Result<RegionAffine> {
    let hidden = model.receiver_relu();
    let out = model.receiver_softmax();
    if active.len() != hidden.outputs() {
        return Err(Error::shape(format!(
            "activity pattern has {} units, receiver has {}",
            active.len(),
            hidden.outputs()
        )));
    }
    let (h, n) = (hidden.outputs(), hidden.inputs());
    let mut gated = hidden.weights.clone();
    let mut gated_bias = hidden.bias.clone();
    for (j, on) in active.iter().enumerate() {
        if !on {
            gated.data_mut()[j * n..(j + 1) * n].fill(0.0);
            gated_bias[j] = 0.0;
        }
    }
    debug_assert_eq!(gated.rows(), h);
    let weights = out.weights.matmul(&gated)?;
    let mut bias = out.weights.matvec(&gated_bias)?;
    for (b, o) in bias.iter_mut().zip(&out.bias) {
        *b += o;
    }
    Ok(RegionAffine {
        active: active.to_vec(),
        weights,
        bias,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseDecomposition {
    pub sigma2: f64,
    pub signal_term: f64,
    pub noise_term: f64,
    pub predicted_total: f64,
    /// Simulated `‖p − s‖²` over blocks that stay in the reference activity
    /// region of the transmitted entry.
    pub simulated_mse: f64,
    /// Simulated `‖p − s‖²` over all blocks.
    pub simulated_mse_all: f64,
    /// Fraction of blocks with every receiver relu unit active.
    pub active_fraction: f64,
    /// Fraction of blocks that stay in the reference activity region.
    pub region_fraction: f64,
    pub samples: u64,
    /// Entries left out of the prediction because a logit falls inside the
    /// singular floor.
    pub excluded_entries: Vec<usize>,
}

/// Linearization of one codebook entry at its noiseless logits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryLinearization {
    pub region: RegionAffine,
    pub f: LinearizedReceiver,
    /// `‖F₊(W·x + b) − s‖²`
    pub signal: f64,
    /// `‖F₊W‖²_F`
    pub noise_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedModel {
    pub per_entry: Vec<Option<EntryLinearization>>,
    /// Mean signal term over included entries.
    pub signal_term: f64,
    /// Mean `‖F₊W‖²_F` over included entries.
    pub noise_gain: f64,
}

pub fn linearize(model: &Autoencoder, taylor_order: usize, u_min: f64) -> Result<LinearizedModel> {
    let tx = model.constellation()?;
    let entries = model.codebook().entries();
    let mut per_entry = Vec::with_capacity(tx.len());
    let (mut signal, mut gain, mut used) = (0.0, 0.0, 0usize);
    for (x, s) in tx.iter().zip(entries) {
        let region = region_affine(model, &activity(model, x)?)?;
        let u = region.logits(x)?;
        let f = match build_f_with_floor(&u, taylor_order, u_min) {
            Ok(f) => f,
            Err(Error::Singular { .. }) => {
                per_entry.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let p = f.apply(&u)?;
        let e_signal: f64 = p.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
        let e_gain: f64 = f
            .diagonal
            .iter()
            .enumerate()
            .map(|(i, d)| d * d * region.weights.row(i).iter().map(|w| w * w).sum::<f64>())
            .sum();
        signal += e_signal;
        gain += e_gain;
        used += 1;
        per_entry.push(Some(EntryLinearization {
            region,
            f,
            signal: e_signal,
            noise_gain: e_gain,
        }));
    }
    if used == 0 {
        return Err(Error::Degenerate(
            "every codebook entry has a logit inside the singular floor".into(),
        ));
    }
    Ok(LinearizedModel {
        per_entry,
        signal_term: signal / used as f64,
        noise_gain: gain / used as f64,
    })
}

/// Predicted versus simulated MSE at noise variance `sigma2`.
pub fn mse_decomposition(model: &Autoencoder, sigma2: f64, samples: u64, rng: &mut SimRng) -> Result<MseDecomposition> {
    mse_decomposition_with(model, sigma2, samples, DEFAULT_TAYLOR_ORDER, DEFAULT_U_MIN, rng)
}

pub fn mse_decomposition_with(
    model: &Autoencoder,
    sigma2: f64,
    samples: u64,
    taylor_order: usize,
    u_min: f64,
    rng: &mut SimRng,
) -> Result<MseDecomposition> {
    if !(sigma2 >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    let lin = linearize(model, taylor_order, u_min)?;
    let included: Vec<usize> = (0..lin.per_entry.len())
        .filter(|&i| lin.per_entry[i].is_some())
        .collect();
    let excluded_entries = (0..lin.per_entry.len())
        .filter(|&i| lin.per_entry[i].is_none())
        .collect();
    let tx = model.constellation()?;
    let entries = model.codebook().entries();
    let (mut all_on, mut in_region, mut sum_region, mut sum_all) = (0u64, 0u64, 0.0, 0.0);
    for _ in 0..samples {
        // Draws are restricted to the entries the prediction covers.
        let i = included[rng.random_range(0..included.len())];
        let reference = &lin.per_entry[i].as_ref().expect("included").region.active;
        let mut y = tx[i].clone();
        awgn_in_place(&mut y, sigma2, rng)?;
        let p = model.receive(&y)?;
        let e = loss_eval(LossKind::Mse, &entries[i], &p)?;
        sum_all += e;
        let act = activity(model, &y)?;
        all_on += u64::from(act.iter().all(|a| *a));
        if &act == reference {
            in_region += 1;
            sum_region += e;
        }
    }
    let noise_term = lin.noise_gain * sigma2;
    Ok(MseDecomposition {
        sigma2,
        signal_term: lin.signal_term,
        noise_term,
        predicted_total: lin.signal_term + noise_term,
        simulated_mse: if in_region > 0 {
            sum_region / in_region as f64
        } else {
            f64::NAN
        },
        simulated_mse_all: sum_all / samples as f64,
        active_fraction: all_on as f64 / samples as f64,
        region_fraction: in_region as f64 / samples as f64,
        samples,
        excluded_entries,
    })
}

/// Fraction of blocks, over uniformly drawn messages, in which every receiver
/// relu unit is active.
pub fn relu_activation_report(model: &Autoencoder, sigma2: f64, samples: u64, rng: &mut SimRng) -> Result<f64> {
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    let tx = model.constellation()?;
    let mut active = 0u64;
    for _ in 0..samples {
        let mut y = tx[rng.random_range(0..tx.len())].clone();
        awgn_in_place(&mut y, sigma2, rng)?;
        active += u64::from(activity(model, &y)?.iter().all(|a| *a));
    }
    Ok(active as f64 / samples as f64)
}

/// Whether each entry's noiseless transmission keeps every relu unit active.
pub fn noiseless_activity(model: &Autoencoder) -> Result<Vec<bool>> {
    (0..model.codebook().len())
        .map(|i| Ok(activity(model, &model.transmit(MessageId(i))?)?.iter().all(|a| *a)))
        .collect()
}

/// `log₂(1 + 2·(Eb/N0)·⌊log₂ C(M, m)⌋ / n)` in bits/s/Hz.
pub fn achievable_rate(size: usize, order: usize, channel_uses: usize, ebn0_db: f64) -> Result<f64> {
    if order == 0 || order > size || size < 2 {
        return Err(Error::domain(format!("invalid codebook parameters M={size} m={order}")));
    }
    if channel_uses == 0 {
        return Err(Error::domain("channel uses must be positive"));
    }
    let bits = bits_for(size, order) as f64;
    Ok((1.0 + 2.0 * db_to_linear(ebn0_db) * bits / channel_uses as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::{build_model, TrainingConfig};
    use crate::nn::softmax;
    use crate::representation::build_onehot;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn sup_error(u: &[f64], order: usize) -> f64 {
        let f = build_f(u, order).unwrap();
        let approx = f.apply(u).unwrap();
        softmax(u)
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn equal_activations_give_uniform_output() {
        let u = [0.7; 6];
        let f = build_f(&u, 40).unwrap();
        for p in f.apply(&u).unwrap() {
            assert!((p - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn error_shrinks_with_order() {
        let u = [0.3, 1.9, 4.2, 2.5];
        let mut last = f64::INFINITY;
        for n in [1, 2, 5, 10, 20] {
            let e = sup_error(&u, n);
            assert!(e < last, "order {n}: {e} ≥ {last}");
            last = e;
        }
        assert!(sup_error(&u, 1) > sup_error(&u, 20));
    }

    #[test]
    fn matrix_is_diagonal() {
        let f = build_f(&[0.5, 1.0, 2.0], 20).unwrap().matrix();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(f.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn singular_activation_names_index() {
        match build_f(&[1.0, 0.0005, 2.0], 20) {
            Err(Error::Singular { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(build_f(&[1.0], 0).is_err());
        assert!(build_f_with_floor(&[1.0, 0.0005], 20, 1e-4).is_ok());
    }

    #[test]
    fn rate_gain_of_six_order_representation() {
        let gain = achievable_rate(16, 6, 7, 20.0).unwrap() - achievable_rate(16, 1, 7, 20.0).unwrap();
        assert!((gain - 1.577).abs() < 0.01, "{gain}");
        let a = achievable_rate(16, 6, 7, 20.0).unwrap();
        assert!((a - (1.0 + 2.0 * 100.0 * 12.0 / 7.0f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn six_bit_configurations_share_a_curve() {
        for db in [-5.0, 0.0, 7.5, 20.0] {
            let a = achievable_rate(8, 4, 7, db).unwrap();
            assert_eq!(a, achievable_rate(16, 2, 7, db).unwrap());
            assert_eq!(a, achievable_rate(64, 1, 7, db).unwrap());
        }
    }

    #[test]
    fn rate_vanishes_at_low_snr() {
        assert!(achievable_rate(16, 2, 7, -200.0).unwrap() < 1e-18);
        assert!(achievable_rate(4, 5, 7, 0.0).is_err());
    }

    fn trained_m4() -> Autoencoder {
        let config = TrainingConfig {
            epochs: 15,
            train_samples: 4000,
            ..TrainingConfig::default()
        };
        let mut model = build_model(build_onehot(4).unwrap(), 7, 5).unwrap();
        model.train(&config).unwrap();
        model
    }

    #[test]
    fn decomposition_closed_form() {
        let model = trained_m4();
        let clean = mse_decomposition(&model, 0.0, 200, &mut seeded(1)).unwrap();
        assert_eq!(clean.noise_term, 0.0);
        assert_eq!(clean.region_fraction, 1.0);
        assert_eq!(clean.predicted_total, clean.signal_term);
        let a = mse_decomposition(&model, 0.05, 10, &mut seeded(1)).unwrap();
        let b = mse_decomposition(&model, 0.1, 10, &mut seeded(1)).unwrap();
        assert!((b.noise_term - 2.0 * a.noise_term).abs() <= 1e-15 * b.noise_term);
        assert!(b.predicted_total >= a.predicted_total);
    }

    #[test]
    fn region_map_reproduces_receiver_logits() {
        let model = trained_m4();
        let mut rng = seeded(2);
        for i in 0..4 {
            let x = model.transmit(MessageId(i)).unwrap();
            let mut y = x.clone();
            awgn_in_place(&mut y, 0.05, &mut rng).unwrap();
            let region = region_affine(&model, &activity(&model, &y).unwrap()).unwrap();
            let u = region.logits(&y).unwrap();
            let exact = model.receive_detailed(&y).unwrap().logits;
            for (a, b) in u.iter().zip(&exact) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn signal_term_is_exact_for_long_series_at_moderate_logits() {
        // Untrained logits are small, where the series converges quickly.
        let model = build_model(build_onehot(4).unwrap(), 7, 8).unwrap();
        let lin = linearize(&model, 60, 1e-6).unwrap();
        for (i, e) in lin.per_entry.iter().enumerate() {
            let Some(e) = e else { continue };
            let p = model.receive(&model.transmit(MessageId(i)).unwrap()).unwrap();
            let exact = loss_eval(LossKind::Mse, model.codebook().entry(MessageId(i)), &p).unwrap();
            assert!((e.signal - exact).abs() < 1e-9, "{} vs {exact}", e.signal);
        }
    }

    #[test]
    fn activation_report_is_reproducible() {
        let model = trained_m4();
        let a = relu_activation_report(&model, 0.1, 500, &mut seeded(4)).unwrap();
        let b = relu_activation_report(&model, 0.1, 500, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
        let clean = relu_activation_report(&model, 0.0, 400, &mut seeded(9)).unwrap();
        let activity = noiseless_activity(&model).unwrap();
        if activity.iter().all(|x| *x) {
            assert_eq!(clean, 1.0);
        } else if activity.iter().all(|x| !*x) {
            assert_eq!(clean, 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn taylor_order_twenty_matches_softmax(u in proptest::collection::vec(0.1f64..5.0, 2..12)) {
            prop_assert!(sup_error(&u, 20) <= 1e-6);
        }
    }
}
