//! Link-level simulation of the multiuser MIMO downlink with generalized
//! precoding-aided spatial modulation (GPSM).
//!
//! Every base-station antenna transmits, and in each channel use only
//! `n_iba` of a user's `n_r` receive antennas carry symbols. The choice of
//! active antennas (the pattern) carries `k_ssk` extra bits. The stack is:
//!
//! - [`pattern_space`]: pattern combinatorics and pattern-set selection
//! - [`modem`]: constellations and bit mapping
//! - [`channel`]: Rayleigh channels, ZF precoding, energy bookkeeping
//! - [`detector`]: joint ML detection of pattern and symbols
//! - [`notification`]: signaling of the set index with `F`-fold repetition
//! - [`montecarlo`]: BER simulation over SNR sweeps

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod detector;
pub mod error;
pub mod modem;
pub mod notification;
pub mod montecarlo;
pub mod pattern_space;

pub use error::{GpsmError, Result};
