//! BPSK with a systematic (7,4) Hamming code.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::sigma2_from_ebn0;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Information rate of the coded link, 4 bits over 7 channel uses.
pub const HAMMING_RATE: f64 = 4.0 / 7.0;

const PARITY: [[u8; 3]; 4] = [[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammingCode74 {
    /// `[I₄ | P]`
    pub generator: [[u8; 7]; 4],
    /// `[Pᵀ | I₃]`
    pub parity_check: [[u8; 7]; 3],
    /// Syndrome value (`s₀·4 + s₁·2 + s₂`) to the flipped position.
    pub syndrome_table: [Option<usize>; 8],
    codewords: [[u8; 7]; 16],
}

impl Default for HammingCode74 {
    fn default() -> Self {
        Self::new()
    }
}

impl HammingCode74 {
    pub fn new() -> Self {
        let mut generator = [[0u8; 7]; 4];
        for (i, row) in generator.iter_mut().enumerate() {
            row[i] = 1;
            row[4..].copy_from_slice(&PARITY[i]);
        }
        let mut parity_check = [[0u8; 7]; 3];
        for (j, row) in parity_check.iter_mut().enumerate() {
            for i in 0..4 {
                row[i] = PARITY[i][j];
            }
            row[4 + j] = 1;
        }
        let mut syndrome_table = [None; 8];
        for pos in 0..7 {
            let s = (0..3).fold(0usize, |acc, j| acc << 1 | parity_check[j][pos] as usize);
            syndrome_table[s] = Some(pos);
        }
        let mut codewords = [[0u8; 7]; 16];
        for (k, cw) in codewords.iter_mut().enumerate() {
            *cw = encode_with(&generator, &message_bits(k));
        }
        Self {
            generator,
            parity_check,
            syndrome_table,
            codewords,
        }
    }

    pub fn codewords(&self) -> &[[u8; 7]; 16] {
        &self.codewords
    }

    pub fn encode(&self, bits: &[u8; 4]) -> [u8; 7] {
        encode_with(&self.generator, bits)
    }

    pub fn syndrome(&self, word: &[u8; 7]) -> usize {
        self.parity_check.iter().fold(0usize, |acc, row| {
            let bit = row.iter().zip(word).fold(0u8, |b, (h, w)| b ^ (h & w));
            acc << 1 | bit as usize
        })
    }

    pub fn decode_hd(&self, word: &[u8; 7]) -> [u8; 4] {
        let mut corrected = *word;
        if let Some(pos) = self.syndrome_table[self.syndrome(word)] {
            corrected[pos] ^= 1;
        }
        let mut out = [0u8; 4];
        out.copy_from_slice(&corrected[..4]);
        out
    }

    /// Minimum Euclidean distance to the BPSK images; ties go to the lower
    /// codeword index.
    pub fn decode_ml(&self, y: &[f64; 7]) -> [u8; 4] {
        // Minimizing ‖y − x‖² over ±1 vectors is maximizing ⟨y, x⟩.
        let mut best = 0;
        let mut best_corr = f64::NEG_INFINITY;
        for (k, cw) in self.codewords.iter().enumerate() {
            let corr: f64 = cw.iter().zip(y).map(|(&b, v)| (1.0 - 2.0 * b as f64) * v).sum();
            if corr > best_corr {
                best_corr = corr;
                best = k;
            }
        }
        message_bits(best)
    }
}

fn encode_with(generator: &[[u8; 7]; 4], bits: &[u8; 4]) -> [u8; 7] {
    let mut out = [0u8; 7];
    for (row, &b) in generator.iter().zip(bits) {
        if b & 1 == 1 {
            for (o, g) in out.iter_mut().zip(row) {
                *o ^= g;
            }
        }
    }
    out
}

/// Message index to four bits, most significant first.
pub fn message_bits(index: usize) -> [u8; 4] {
    [3, 2, 1, 0].map(|s| ((index >> s) & 1) as u8)
}

pub fn hamming_encode(bits: &[u8; 4]) -> [u8; 7] {
    HammingCode74::new().encode(bits)
}

pub fn hamming_decode_hd(word: &[u8; 7]) -> [u8; 4] {
    HammingCode74::new().decode_hd(word)
}

pub fn hamming_decode_ml(y: &[f64; 7]) -> [u8; 4] {
    HammingCode74::new().decode_ml(y)
}

pub fn bpsk_modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * (b & 1) as f64).collect()
}

pub fn bpsk_demod_hard(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| u8::from(v < 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineScheme {
    HammingHd,
    HammingMl,
    UncodedBpsk,
}

impl BaselineScheme {
    pub const ALL: [BaselineScheme; 3] = [Self::HammingHd, Self::HammingMl, Self::UncodedBpsk];

    pub fn name(self) -> &'static str {
        match self {
            Self::HammingHd => "hamming_hd",
            Self::HammingMl => "hamming_ml",
            Self::UncodedBpsk => "uncoded_bpsk",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Bits per channel use.
    pub fn rate(self) -> f64 {
        match self {
            Self::UncodedBpsk => 1.0,
            _ => HAMMING_RATE,
        }
    }
}

/// Error counts over blocks of four information bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BaselineCounts {
    pub blocks: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
}

impl BaselineCounts {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (4 * self.blocks) as f64
    }

    pub fn bler(&self) -> f64 {
        self.block_errors as f64 / self.blocks as f64
    }

    pub fn merge(&mut self, other: &BaselineCounts) {
        self.blocks += other.blocks;
        self.block_errors += other.block_errors;
        self.bit_errors += other.bit_errors;
    }
}

/// Monte Carlo over uniformly random 4-bit messages at the given Eb/N0.
pub fn simulate_baseline(
    scheme: BaselineScheme,
    ebn0_db: f64,
    blocks: u64,
    rng: &mut SimRng,
) -> Result<BaselineCounts> {
    if blocks == 0 {
        return Err(Error::domain("at least one block is required"));
    }
    let sigma = sigma2_from_ebn0(scheme.rate(), ebn0_db)?.sqrt();
    let code = HammingCode74::new();
    let mut counts = BaselineCounts::default();
    for _ in 0..blocks {
        let msg = message_bits(rng.random_range(0..16));
        let decoded: [u8; 4] = match scheme {
            BaselineScheme::UncodedBpsk => {
                let mut out = [0u8; 4];
                for (o, &b) in out.iter_mut().zip(&msg) {
                    let noise: f64 = rng.sample(StandardNormal);
                    let y = 1.0 - 2.0 * b as f64 + sigma * noise;
                    *o = u8::from(y < 0.0);
                }
                out
            }
            _ => {
                let cw = code.encode(&msg);
                let mut y = [0.0; 7];
                for (v, &b) in y.iter_mut().zip(&cw) {
                    let noise: f64 = rng.sample(StandardNormal);
                    *v = 1.0 - 2.0 * b as f64 + sigma * noise;
                }
                if scheme == BaselineScheme::HammingMl {
                    code.decode_ml(&y)
                } else {
                    let mut hard = [0u8; 7];
                    for (h, v) in hard.iter_mut().zip(&y) {
                        *h = u8::from(*v < 0.0);
                    }
                    code.decode_hd(&hard)
                }
            }
        };
        let errs = msg.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
        counts.blocks += 1;
        counts.bit_errors += errs;
        counts.block_errors += u64::from(errs > 0);
    }
    Ok(counts)
}
