//! Signaling of the pattern-set index to each user.
//!
//! The index of the set in use is written in natural binary, zero-padded to a
//! whole number of channel uses, Gray-mapped onto symbols sent on a pattern
//! known to the receiver, and the whole block is repeated `F` times. The
//! receiver sums the copies of each channel use and detects the symbols from
//! the sum: the signal adds coherently (amplitude `F`) while the noise
//! variance only grows by `F`, a per-symbol SNR gain of `F`.

use num_complex::Complex64;

use crate::detector::ml_detect;
use crate::error::{GpsmError, Result};
use crate::modem::{assemble_user_vector, bits_to_uint, uint_to_bits, Constellation};
use crate::pattern_space::{Pattern, PatternSet};

#[derive(Debug, Clone, PartialEq)]
pub struct NotificationConfig {
    /// Repetition count `F`.
    pub f: usize,
    pub known_pattern: Pattern,
    /// Number of candidate sets `L`.
    pub l: u64,
    /// `ceil(log2 L)`.
    pub bits_needed: usize,
    pub uses_per_copy: usize,
    bits_per_symbol: usize,
}

impl NotificationConfig {
    /// Configuration using the canonically first pattern as the known one.
    pub fn new(f: usize, n_r: usize, n_iba: usize, l: u64, c: &Constellation) -> Result<Self> {
        Self::with_pattern(f, Pattern::first(n_r, n_iba)?, l, c)
    }

    pub fn with_pattern(f: usize, known_pattern: Pattern, l: u64, c: &Constellation) -> Result<Self> {
        if f < 1 {
            return Err(GpsmError::InvalidArgument(
                "repetition count must be at least 1".into(),
            ));
        }
        if l < 1 {
            return Err(GpsmError::InvalidArgument(
                "number of candidate sets must be at least 1".into(),
            ));
        }
        let bits_needed = (u64::BITS - (l - 1).leading_zeros()) as usize;
        let per_use = known_pattern.n_iba() * c.bits_per_symbol();
        Ok(Self {
            f,
            bits_needed,
            uses_per_copy: bits_needed.div_ceil(per_use),
            bits_per_symbol: c.bits_per_symbol(),
            known_pattern,
            l,
        })
    }

    /// Total channel uses of one notification, `F · uses_per_copy`.
    pub fn block_len(&self) -> usize {
        self.f * self.uses_per_copy
    }

    fn padded_bits(&self) -> usize {
        self.uses_per_copy * self.known_pattern.n_iba() * self.bits_per_symbol
    }
}

/// Per-user symbol vectors carrying `set_index`, `F` copies back to back.
pub fn encode_notification(
    set_index: u64,
    cfg: &NotificationConfig,
    c: &Constellation,
    e_k: f64,
) -> Result<Vec<Vec<Complex64>>> {
    if set_index >= cfg.l {
        return Err(GpsmError::IndexOutOfRange {
            index: set_index,
            l: cfg.l,
        });
    }
    let mut bits = uint_to_bits(set_index, cfg.bits_needed);
    bits.resize(cfg.padded_bits(), false);
    let n_iba = cfg.known_pattern.n_iba();
    let copy: Vec<Vec<Complex64>> = bits
        .chunks(n_iba * c.bits_per_symbol())
        .map(|use_bits| {
            let b: Vec<Complex64> = use_bits
                .chunks(c.bits_per_symbol())
                .map(|sym| c.point(bits_to_uint(sym) as usize))
                .collect();
            assemble_user_vector(e_k, &cfg.known_pattern, &b)
        })
        .collect::<Result<_>>()?;
    Ok(std::iter::repeat_n(copy, cfg.f).flatten().collect())
}

/// Position-wise sum of the `F` copies of each channel use.
pub fn accumulate(received: &[Vec<Complex64>], cfg: &NotificationConfig) -> Result<Vec<Vec<Complex64>>> {
    if received.len() != cfg.block_len() {
        return Err(GpsmError::MalformedBlock {
            expected: cfg.block_len(),
            got: received.len(),
        });
    }
    let n_r = cfg.known_pattern.n_r();
    let mut sums = vec![vec![Complex64::new(0.0, 0.0); n_r]; cfg.uses_per_copy];
    for (j, v) in received.iter().enumerate() {
        if v.len() != n_r {
            return Err(GpsmError::DimensionMismatch {
                what: "notification vector",
                expected: n_r,
                got: v.len(),
            });
        }
        for (acc, z) in sums[j % cfg.uses_per_copy].iter_mut().zip(v) {
            *acc += z;
        }
    }
    Ok(sums)
}

/// Recovers the set index from a received notification block.
///
/// Returns [`GpsmError::NotificationFailure`] when the decoded value is not a
/// valid set index; the receiver should then keep its previous set.
pub fn decode_notification(
    received: &[Vec<Complex64>],
    cfg: &NotificationConfig,
    c: &Constellation,
    e_k: f64,
) -> Result<u64> {
    let sums = accumulate(received, cfg)?;
    let known = PatternSet::new(vec![cfg.known_pattern.clone()])?;
    let f = cfg.f as f64;
    let mut bits = Vec::with_capacity(cfg.padded_bits());
    for y in &sums {
        let det = ml_detect(y, f * f * e_k, &known, c)?;
        for &label in &det.labels {
            bits.extend(c.label_bits(label));
        }
    }
    let decoded = bits_to_uint(&bits[..cfg.bits_needed]);
    if decoded >= cfg.l {
        return Err(GpsmError::NotificationFailure {
            decoded,
            l: cfg.l,
        });
    }
    Ok(decoded)
}
