//! Link-level simulator for autoencoder-based end-to-end communication.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: a small dense-network engine (forward/backward passes, power
//!   normalization, losses, Adam).
//! - [`representation`]: one-hot and generalized (order-`m`) codebooks,
//!   top-`m` decoding, gray mapping, data rates.
//! - [`channel`]: SNR conventions and the real AWGN channel.
//! - [`autoencoder`]: the transmitter/receiver model, offline training and
//!   checkpoints.
//! - [`adaptive`]: probe / select / transmit adaptive vector selection.
//! - [`baseline`]: BPSK with a (7,4) Hamming code, hard and ML decoding.
//! - [`analysis`]: softmax linearization, MSE decomposition, achievable rate.
//! - [`harness`]: Monte Carlo estimators, CSV output, figure recipes and the
//!   experiment configuration used by the `dlcomm` binary.

pub mod adaptive;
pub mod analysis;
pub mod autoencoder;
pub mod baseline;
pub mod channel;
pub mod error;
pub mod harness;
pub mod nn;
pub mod representation;
pub mod rng;

pub use error::{Error, Result};
