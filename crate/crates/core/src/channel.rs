//! Real-valued AWGN channel and the two SNR conventions.
//!
//! BLER sweeps are indexed by E_b/N_0, where the per-dimension noise variance
//! is `σ² = (2·R·E_b/N_0)⁻¹` for a code of rate `R` bits per channel use.
//! Training and adaptive probing are indexed by `SNR = 1/σ²`. Both are kept
//! explicit in names (`ebn0_db`, `snr_db`) to avoid unit mix-ups.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// `σ² = (2·R·10^(E_b/N_0 / 10))⁻¹`
pub fn sigma2_from_ebn0(rate: f64, ebn0_db: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::domain(format!("rate must be positive, got {rate}")));
    }
    Ok(1.0 / (2.0 * rate * db_to_linear(ebn0_db)))
}

/// `σ² = 10^(−SNR/10)`
pub fn snr_db_to_sigma2(snr_db: f64) -> f64 {
    db_to_linear(-snr_db)
}

/// Operating point of a block transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// Channel uses per block.
    pub channel_uses: usize,
    /// Bits per channel use.
    pub rate: f64,
    pub ebn0_db: f64,
    /// Noise variance per real dimension.
    pub sigma2: f64,
}

impl ChannelSpec {
    pub fn from_ebn0(channel_uses: usize, rate: f64, ebn0_db: f64) -> Result<Self> {
        Ok(ChannelSpec {
            channel_uses,
            rate,
            ebn0_db,
            sigma2: sigma2_from_ebn0(rate, ebn0_db)?,
        })
    }

    pub fn from_snr_db(channel_uses: usize, rate: f64, snr_db: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::domain(format!("rate must be positive, got {rate}")));
        }
        let sigma2 = snr_db_to_sigma2(snr_db);
        Ok(ChannelSpec {
            channel_uses,
            rate,
            ebn0_db: linear_to_db(1.0 / (2.0 * rate * sigma2)),
            sigma2,
        })
    }

    /// Noiseless link.
    pub fn noiseless(channel_uses: usize, rate: f64) -> Self {
        ChannelSpec {
            channel_uses,
            rate,
            ebn0_db: f64::INFINITY,
            sigma2: 0.0,
        }
    }

    pub fn snr_linear(&self) -> f64 {
        1.0 / self.sigma2
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr_linear())
    }
}

/// `y = x + n`, `n ~ N(0, σ²·I)`.
pub fn awgn<R: Rng + ?Sized>(x: &[f64], sigma2: f64, rng: &mut R) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    awgn_in_place(&mut y, sigma2, rng)?;
    Ok(y)
}

pub fn awgn_in_place<R: Rng + ?Sized>(x: &mut [f64], sigma2: f64, rng: &mut R) -> Result<()> {
    if !(sigma2 >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    if sigma2 == 0.0 {
        return Ok(());
    }
    let sigma = sigma2.sqrt();
    for v in x.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += sigma * z;
    }
    Ok(())
}
