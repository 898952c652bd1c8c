//! Monte-Carlo BER simulation.
//!
//! Each channel realization is one frame: draw `H`, build the ZF precoder,
//! pick every user's pattern set according to the policy, optionally signal
//! the set index, then send `vectors_per_frame` random bit blocks per user
//! and count bit errors after ML detection.
//!
//! Randomness comes from ChaCha8 substreams keyed by
//! `(master_seed, purpose, realization, snr)`. The channel, random-set and
//! data streams do not depend on the SNR point or the pattern policy, and
//! noise depends only on `(realization, snr)`, so curves for different SNRs
//! and policies are paired. Realizations are independent work units and the
//! reduction is an integer sum, so results do not depend on the worker count.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    column_energies, propagate_into, transmit_into, zero_forcing, ChannelRealization, NoiseSpec,
    PrecoderBundle, ZeroForcing, DEFAULT_RCOND_THRESHOLD,
};
use crate::detector::DetectorScratch;
use crate::error::{GpsmError, Result};
use crate::modem::{make_constellation, Constellation};
use crate::notification::{decode_notification, encode_notification, NotificationConfig};
use crate::pattern_space::{
    optimize_pattern_set, random_pattern_set, throughput, PatternSet, PatternSpaceSpec,
    DEFAULT_ENUMERATION_CAP,
};

/// Total transmit energy per channel use. Noise is scaled against it.
pub const E_T: f64 = 1.0;

/// Channel draws attempted per realization before giving up.
const MAX_CHANNEL_ATTEMPTS: u64 = 1_000;

/// How the transmitter picks each user's pattern set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternPolicy {
    /// The candidate set with this canonical index, for every realization.
    Fixed(u64),
    /// A uniformly random candidate set, redrawn per realization.
    Random,
    /// The cost-minimizing set, known to the receivers without signaling.
    Optimized,
    /// The cost-minimizing set, signaled with `repetitions`-fold notification.
    OptimizedNotified { repetitions: usize },
}

/// When the notified set takes effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotificationTiming {
    /// Sets chosen for frame `r`'s channel are notified and used in frame `r`.
    #[default]
    SameFrame,
    /// Sets chosen for frame `r − 1`'s channel are notified and used in frame `r`.
    Pipelined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub k_users: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub n_iba: usize,
    /// Modulation order `M`.
    pub m: usize,
    /// Per-user energy fractions `ε_k`, mean one.
    pub eps: Vec<f64>,
    pub snr_grid_db: Vec<f64>,
    pub channel_realizations: usize,
    pub vectors_per_frame: usize,
    pub pattern_policy: PatternPolicy,
    pub master_seed: u64,
    #[serde(default)]
    pub notification_timing: NotificationTiming,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
    #[serde(default = "default_rcond")]
    pub rcond_threshold: f64,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

fn default_rcond() -> f64 {
    DEFAULT_RCOND_THRESHOLD
}

impl SimScenario {
    /// A scenario with equal user energies and the default numerical settings.
    pub fn new(k_users: usize, n_t: usize, n_r: usize, n_iba: usize, m: usize) -> Self {
        Self {
            k_users,
            n_t,
            n_r,
            n_iba,
            m,
            eps: vec![1.0; k_users],
            snr_grid_db: (0..=12).map(|i| 2.0 * i as f64).collect(),
            channel_realizations: 1_000,
            vectors_per_frame: 3_200,
            pattern_policy: PatternPolicy::Optimized,
            master_seed: 0,
            notification_timing: NotificationTiming::SameFrame,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            rcond_threshold: DEFAULT_RCOND_THRESHOLD,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GpsmError::InvalidScenario(msg));
        if self.k_users == 0 {
            return bad("users must be at least 1".into());
        }
        if self.n_t < self.k_users * self.n_r {
            return bad(format!(
                "tx_antennas ({}) must be at least users·rx_antennas ({})",
                self.n_t,
                self.k_users * self.n_r
            ));
        }
        if self.n_iba < 1 || self.n_iba > self.n_r {
            return bad(format!(
                "iba ({}) must lie in 1..=rx_antennas ({})",
                self.n_iba, self.n_r
            ));
        }
        make_constellation(self.m)?;
        if self.eps.len() != self.k_users {
            return bad(format!(
                "eps has {} entries, expected one per user ({})",
                self.eps.len(),
                self.k_users
            ));
        }
        crate::channel::validate_fractions(&self.eps)?;
        if self.snr_grid_db.is_empty() {
            return bad("snr grid must not be empty".into());
        }
        if self.snr_grid_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("snr values must be numbers below +inf or +inf".into());
        }
        if self.channel_realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.vectors_per_frame == 0 {
            return bad("vectors_per_frame must be at least 1".into());
        }
        let spec = self.spec()?;
        // The per-user bit block is drawn from a single u64.
        if self.bits_per_user() > 64 {
            return bad("more than 64 bits per user per channel use".into());
        }
        match self.pattern_policy {
            PatternPolicy::Fixed(i) => {
                let l = spec.candidate_count(self.enumeration_cap)?;
                if i >= l {
                    return bad(format!("fixed set index {i} out of range (L = {l})"));
                }
            }
            PatternPolicy::Random => {
                spec.candidate_count(self.enumeration_cap)?;
            }
            PatternPolicy::Optimized => {}
            PatternPolicy::OptimizedNotified { repetitions } => {
                spec.candidate_count(self.enumeration_cap)?;
                if repetitions == 0 {
                    return bad("repetitions must be at least 1".into());
                }
            }
        }
        if let Some(0) = self.workers {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<PatternSpaceSpec> {
        PatternSpaceSpec::new(self.n_r, self.n_iba)
    }

    fn bits_per_user(&self) -> usize {
        let k_ssk = self.spec().map(|s| s.k_ssk).unwrap_or(0) as usize;
        k_ssk + self.n_iba * self.m.trailing_zeros() as usize
    }

    /// Bits per channel use over all users.
    pub fn rate(&self) -> Result<u64> {
        throughput(self.k_users, self.spec()?.k_ssk, self.n_iba, self.m)
    }
}

/// Outcome of one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub per_user_ber: Vec<f64>,
    pub spatial_bit_errors: u64,
    pub symbol_bit_errors: u64,
    pub notification_failures: u64,
    pub rejected_channels: u64,
}

/// Integer counts for one SNR point; merging is exact and order-free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub bits_per_user: Vec<u64>,
    pub errors_per_user: Vec<u64>,
    pub spatial_bit_errors: u64,
    pub symbol_bit_errors: u64,
    pub notification_failures: u64,
    pub rejected_channels: u64,
}

impl Tally {
    fn new(users: usize) -> Self {
        Self {
            bits_per_user: vec![0; users],
            errors_per_user: vec![0; users],
            ..Self::default()
        }
    }

    fn merge(&mut self, other: &Tally) {
        for (a, b) in self.bits_per_user.iter_mut().zip(&other.bits_per_user) {
            *a += b;
        }
        for (a, b) in self.errors_per_user.iter_mut().zip(&other.errors_per_user) {
            *a += b;
        }
        self.spatial_bit_errors += other.spatial_bit_errors;
        self.symbol_bit_errors += other.symbol_bit_errors;
        self.notification_failures += other.notification_failures;
        self.rejected_channels += other.rejected_channels;
    }

    fn into_record(self, snr_db: f64) -> BerRecord {
        let bits_sent: u64 = self.bits_per_user.iter().sum();
        let bit_errors: u64 = self.errors_per_user.iter().sum();
        let ratio = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
        BerRecord {
            snr_db,
            bits_sent,
            bit_errors,
            ber: ratio(bit_errors, bits_sent),
            per_user_ber: self
                .errors_per_user
                .iter()
                .zip(&self.bits_per_user)
                .map(|(&e, &n)| ratio(e, n))
                .collect(),
            spatial_bit_errors: self.spatial_bit_errors,
            symbol_bit_errors: self.symbol_bit_errors,
            notification_failures: self.notification_failures,
            rejected_channels: self.rejected_channels,
        }
    }
}

/// `σ_n² = E_T / 10^(snr_db/10)`; `+inf` dB gives zero noise.
pub fn sigma_from_snr(e_t: f64, snr_db: f64) -> Result<f64> {
    if !(e_t > 0.0) {
        return Err(GpsmError::InvalidArgument(format!(
            "transmit energy must be positive, got {e_t}"
        )));
    }
    Ok(e_t / 10f64.powf(snr_db / 10.0))
}

fn noise_for(snr_db: f64) -> Result<NoiseSpec> {
    let sigma2 = sigma_from_snr(E_T, snr_db)?;
    if sigma2 == 0.0 {
        Ok(NoiseSpec::noiseless())
    } else {
        NoiseSpec::new(sigma2)
    }
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Channel = 1,
    RandomSet = 2,
    Data = 3,
    Noise = 4,
    NotificationNoise = 5,
}

/// Independent ChaCha8 generator for one `(purpose, realization, snr)` key.
fn substream(master_seed: u64, stream: Stream, realization: u64, snr_db: Option<f64>) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..24].copy_from_slice(&realization.to_le_bytes());
    key[24..].copy_from_slice(&snr_db.map_or(0, f64::to_bits).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Scenario-wide objects shared by all realizations.
struct Prepared<'a> {
    scn: &'a SimScenario,
    spec: PatternSpaceSpec,
    c: Constellation,
    notify: Option<NotificationConfig>,
}

impl<'a> Prepared<'a> {
    fn new(scn: &'a SimScenario) -> Result<Self> {
        scn.validate()?;
        let spec = scn.spec()?;
        let c = make_constellation(scn.m)?;
        let notify = match scn.pattern_policy {
            PatternPolicy::OptimizedNotified { repetitions } => Some(NotificationConfig::new(
                repetitions,
                scn.n_r,
                scn.n_iba,
                spec.candidate_count(scn.enumeration_cap)?,
                &c,
            )?),
            _ => None,
        };
        Ok(Self {
            scn,
            spec,
            c,
            notify,
        })
    }

    /// Channel of realization `r` with its precoder and the number of rejected
    /// (ill-conditioned) draws before it.
    fn channel(&self, r: u64) -> Result<(ChannelRealization, ZeroForcing, u64)> {
        let scn = self.scn;
        let mut rng = substream(scn.master_seed, Stream::Channel, r, None);
        let mut rejected = 0;
        loop {
            let h = crate::channel::draw_channel(scn.k_users, scn.n_r, scn.n_t, &mut rng)?;
            match zero_forcing(&h, scn.rcond_threshold) {
                Ok(zf) => return Ok((h, zf, rejected)),
                Err(GpsmError::NearSingularChannel { rcond }) => {
                    rejected += 1;
                    if rejected >= MAX_CHANNEL_ATTEMPTS {
                        return Err(GpsmError::NearSingularChannel { rcond });
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Sets the policy picks for a channel with column energies `g`.
    fn policy_sets(&self, r: u64, g: &[Vec<f64>]) -> Result<Vec<PatternSet>> {
        let scn = self.scn;
        match scn.pattern_policy {
            PatternPolicy::Fixed(i) => Ok(vec![self.spec.set_at(i)?; scn.k_users]),
            PatternPolicy::Random => {
                let mut rng = substream(scn.master_seed, Stream::RandomSet, r, None);
                (0..scn.k_users)
                    .map(|_| random_pattern_set(&self.spec, scn.enumeration_cap, &mut rng))
                    .collect()
            }
            PatternPolicy::Optimized | PatternPolicy::OptimizedNotified { .. } => g
                .iter()
                .map(|g_k| optimize_pattern_set(g_k, &self.spec))
                .collect(),
        }
    }

    fn default_sets(&self) -> Result<Vec<PatternSet>> {
        Ok(vec![self.spec.set_at(0)?; self.scn.k_users])
    }

    /// Sets chosen for the channel of realization `r`.
    fn chosen_sets(&self, r: u64) -> Result<Vec<PatternSet>> {
        let (_, zf, _) = self.channel(r)?;
        let g = column_energies(&zf.p, self.scn.k_users, self.scn.n_r)?;
        self.policy_sets(r, &g)
    }

    /// Sets the transmitter uses for data in frame `r`.
    fn data_sets(&self, r: u64, g: &[Vec<f64>]) -> Result<Vec<PatternSet>> {
        match (self.notify.is_some(), self.scn.notification_timing) {
            (true, NotificationTiming::Pipelined) if r == 0 => self.default_sets(),
            (true, NotificationTiming::Pipelined) => self.chosen_sets(r - 1),
            _ => self.policy_sets(r, g),
        }
    }
}

/// Per-realization result: one tally per SNR point plus energy diagnostics.
#[derive(Debug, Clone)]
pub struct RealizationOutcome {
    pub tallies: Vec<Tally>,
    /// `γ` for the sets used in this frame.
    pub gamma: f64,
    pub e_s: f64,
    /// Sample mean of `‖x‖²` over the frame's data vectors.
    pub mean_tx_energy: f64,
}

/// Simulates one frame (channel realization `r`) at every SNR in `snr_grid_db`.
pub fn run_realization(scn: &SimScenario, r: u64, snr_grid_db: &[f64]) -> Result<RealizationOutcome> {
    let prep = Prepared::new(scn)?;
    realization(&prep, r, snr_grid_db)
}

fn realization(prep: &Prepared<'_>, r: u64, snr_grid_db: &[f64]) -> Result<RealizationOutcome> {
    let scn = prep.scn;
    let (k, n_r) = (scn.k_users, scn.n_r);
    let (h, zf, rejected) = prep.channel(r)?;
    let g = column_energies(&zf.p, k, n_r)?;
    let tx_sets = prep.data_sets(r, &g)?;
    let qbar: Vec<&[f64]> = tx_sets.iter().map(|s| s.mean()).collect();
    let bundle = PrecoderBundle::new(zf.p, n_r, &qbar, &scn.eps, E_T)?;

    let fallback = match (&prep.notify, scn.notification_timing) {
        (None, _) => None,
        (Some(_), _) if r == 0 => Some(prep.default_sets()?),
        (Some(_), NotificationTiming::SameFrame) => Some(prep.chosen_sets(r - 1)?),
        (Some(_), NotificationTiming::Pipelined) if r == 1 => Some(prep.default_sets()?),
        (Some(_), NotificationTiming::Pipelined) => Some(prep.chosen_sets(r - 2)?),
    };

    let mut tallies = Vec::with_capacity(snr_grid_db.len());
    let mut mean_tx_energy = 0.0;
    for (point, &snr_db) in snr_grid_db.iter().enumerate() {
        let noise = noise_for(snr_db)?;
        let mut tally = Tally::new(k);
        tally.rejected_channels = rejected;

        let rx_sets = match (&prep.notify, &fallback) {
            (Some(cfg), Some(previous)) => {
                let (sets, failures) =
                    notify_sets(prep, cfg, r, snr_db, noise, &h, &bundle, &tx_sets, previous)?;
                tally.notification_failures = failures;
                sets
            }
            _ => tx_sets.clone(),
        };

        let energy = data_frame(prep, r, snr_db, noise, &h, &bundle, &tx_sets, &rx_sets, &mut tally)?;
        if point == 0 {
            mean_tx_energy = energy;
        }
        tallies.push(tally);
    }
    Ok(RealizationOutcome {
        tallies,
        gamma: bundle.gamma,
        e_s: bundle.e_s(),
        mean_tx_energy,
    })
}

/// Sends every user's set index through the channel and returns the sets the
/// receivers end up using, with the number of users that got a wrong index.
#[allow(clippy::too_many_arguments)]
fn notify_sets(
    prep: &Prepared<'_>,
    cfg: &NotificationConfig,
    r: u64,
    snr_db: f64,
    noise: NoiseSpec,
    h: &ChannelRealization,
    bundle: &PrecoderBundle,
    tx_sets: &[PatternSet],
    previous: &[PatternSet],
) -> Result<(Vec<PatternSet>, u64)> {
    let scn = prep.scn;
    let (k, n_r) = (scn.k_users, scn.n_r);
    let indices: Vec<u64> = tx_sets
        .iter()
        .map(|s| prep.spec.index_of(s))
        .collect::<Result<_>>()?;
    let blocks: Vec<Vec<Vec<Complex64>>> = (0..k)
        .map(|u| encode_notification(indices[u], cfg, &prep.c, bundle.e_user[u]))
        .collect::<Result<_>>()?;

    let mut rng = substream(scn.master_seed, Stream::NotificationNoise, r, Some(snr_db));
    let mut received = vec![Vec::with_capacity(cfg.block_len()); k];
    let mut s = vec![Complex64::new(0.0, 0.0); k * n_r];
    let mut x = vec![Complex64::new(0.0, 0.0); scn.n_t];
    let mut y = vec![Complex64::new(0.0, 0.0); k * n_r];
    for j in 0..cfg.block_len() {
        for (u, block) in blocks.iter().enumerate() {
            s[u * n_r..(u + 1) * n_r].copy_from_slice(&block[j]);
        }
        transmit_into(&bundle.p, &s, &mut x)?;
        propagate_into(h, &x, noise, &mut rng, &mut y)?;
        for u in 0..k {
            received[u].push(y[u * n_r..(u + 1) * n_r].to_vec());
        }
    }

    let mut failures = 0;
    let mut sets = Vec::with_capacity(k);
    for u in 0..k {
        match decode_notification(&received[u], cfg, &prep.c, bundle.e_user[u]) {
            Ok(i) => {
                if i != indices[u] {
                    failures += 1;
                }
                sets.push(prep.spec.set_at(i)?);
            }
            Err(GpsmError::NotificationFailure { .. }) => {
                failures += 1;
                sets.push(previous[u].clone());
            }
            Err(e) => return Err(e),
        }
    }
    Ok((sets, failures))
}

/// Transmits one frame of data and accumulates error counts into `tally`.
/// Returns the sample mean of `‖x‖²`.
#[allow(clippy::too_many_arguments)]
fn data_frame(
    prep: &Prepared<'_>,
    r: u64,
    snr_db: f64,
    noise: NoiseSpec,
    h: &ChannelRealization,
    bundle: &PrecoderBundle,
    tx_sets: &[PatternSet],
    rx_sets: &[PatternSet],
    tally: &mut Tally,
) -> Result<f64> {
    let scn = prep.scn;
    let (k, n_r) = (scn.k_users, scn.n_r);
    let c = &prep.c;
    let bps = c.bits_per_symbol() as u32;
    let k_ssk = prep.spec.k_ssk;
    let symbol_bits = scn.n_iba as u32 * bps;
    let block_bits = k_ssk + symbol_bits;
    let block_mask = if block_bits == 64 { u64::MAX } else { (1u64 << block_bits) - 1 };
    let symbol_mask = (1u64 << symbol_bits) - 1;
    let label_mask = (1u64 << bps) - 1;
    let amps: Vec<f64> = bundle.e_user.iter().map(|e| e.sqrt()).collect();

    let mut data_rng = substream(scn.master_seed, Stream::Data, r, None);
    let mut noise_rng = substream(scn.master_seed, Stream::Noise, r, Some(snr_db));
    let mut s = vec![Complex64::new(0.0, 0.0); k * n_r];
    let mut x = vec![Complex64::new(0.0, 0.0); scn.n_t];
    let mut y = vec![Complex64::new(0.0, 0.0); k * n_r];
    let mut scratch = DetectorScratch::new(n_r);
    let mut blocks = vec![0u64; k];
    let mut energy = 0.0;

    for _ in 0..scn.vectors_per_frame {
        s.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for u in 0..k {
            // Block layout, MSB first: pattern index, then one label per
            // active antenna in ascending antenna order.
            let block = data_rng.next_u64() & block_mask;
            blocks[u] = block;
            let q = &tx_sets[u].patterns()[(block >> symbol_bits) as usize];
            for (slot, &ant) in q.active().iter().enumerate() {
                let shift = symbol_bits - bps * (slot as u32 + 1);
                let label = ((block >> shift) & label_mask) as usize;
                s[u * n_r + ant] = c.point(label) * amps[u];
            }
        }
        transmit_into(&bundle.p, &s, &mut x)?;
        energy += x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        propagate_into(h, &x, noise, &mut noise_rng, &mut y)?;

        for u in 0..k {
            let y_u = &y[u * n_r..(u + 1) * n_r];
            let idx = scratch.detect(y_u, amps[u], &rx_sets[u], c);
            let mut detected = (idx as u64) << symbol_bits;
            for (slot, &ant) in rx_sets[u].patterns()[idx].active().iter().enumerate() {
                let shift = symbol_bits - bps * (slot as u32 + 1);
                detected |= (scratch.best_label[ant] as u64) << shift;
            }
            let diff = detected ^ blocks[u];
            let spatial = (diff >> symbol_bits).count_ones() as u64;
            let symbol = (diff & symbol_mask).count_ones() as u64;
            tally.spatial_bit_errors += spatial;
            tally.symbol_bit_errors += symbol;
            tally.errors_per_user[u] += spatial + symbol;
            tally.bits_per_user[u] += block_bits as u64;
        }
    }
    Ok(energy / scn.vectors_per_frame as f64)
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| GpsmError::InvalidScenario(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// One record per point of `snr_grid_db`, all from the same realizations.
pub fn sweep_points(scn: &SimScenario, snr_grid_db: &[f64]) -> Result<Vec<BerRecord>> {
    let prep = Prepared::new(scn)?;
    let outcomes: Vec<Vec<Tally>> = with_pool(scn.workers, || {
        (0..scn.channel_realizations as u64)
            .into_par_iter()
            .map(|r| realization(&prep, r, snr_grid_db).map(|o| o.tallies))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut totals = vec![Tally::new(scn.k_users); snr_grid_db.len()];
    for tallies in &outcomes {
        for (total, t) in totals.iter_mut().zip(tallies) {
            total.merge(t);
        }
    }
    Ok(totals
        .into_iter()
        .zip(snr_grid_db)
        .map(|(t, &snr)| t.into_record(snr))
        .collect())
}

/// BER at a single SNR point.
pub fn run_ber_point(scn: &SimScenario, snr_db: f64) -> Result<BerRecord> {
    Ok(sweep_points(scn, &[snr_db])?.remove(0))
}

/// BER over the scenario's SNR grid.
pub fn snr_sweep(scn: &SimScenario) -> Result<Vec<BerRecord>> {
    sweep_points(scn, &scn.snr_grid_db)
}

/// SNR (dB) at which a BER curve crosses `target_ber`, by linear
/// interpolation of `log10(BER)` against SNR between the bracketing points.
///
/// Points with zero BER are ignored; the first crossing in ascending SNR wins.
pub fn snr_at_ber(curve: &[(f64, f64)], target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0) {
        return Err(GpsmError::NotBracketed { target: target_ber });
    }
    let mut pts: Vec<(f64, f64)> = curve.iter().copied().filter(|&(_, b)| b > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(&(s, _)) = pts.iter().find(|&&(_, b)| b == target_ber) {
        return Ok(s);
    }
    let t = target_ber.log10();
    for w in pts.windows(2) {
        let ((s1, b1), (s2, b2)) = (w[0], w[1]);
        let (l1, l2) = (b1.log10(), b2.log10());
        if (l1 - t) * (l2 - t) < 0.0 {
            return Ok(s1 + (t - l1) / (l2 - l1) * (s2 - s1));
        }
    }
    Err(GpsmError::NotBracketed { target: target_ber })
}

/// [`snr_at_ber`] over simulation records.
pub fn records_snr_at_ber(records: &[BerRecord], target_ber: f64) -> Result<f64> {
    let curve: Vec<(f64, f64)> = records.iter().map(|r| (r.snr_db, r.ber)).collect();
    snr_at_ber(&curve, target_ber)
}
