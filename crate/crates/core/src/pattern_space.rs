//! Receive-antenna activation patterns and pattern sets.
//!
//! A [`Pattern`] marks which of a user's `n_r` antennas carry information
//! symbols in a channel use. A [`PatternSet`] is the ordered collection of
//! `n_c = 2^k_ssk` patterns that the user's spatial bits index into. Among the
//! `L = C(c_t, n_c)` candidate sets, the transmitter may pick one at random or
//! the one minimizing `g^T q̄`, where `g` holds the squared column norms of the
//! user's precoder block and `q̄` is the set's mean pattern.
//!
//! Candidate sets are ranked lexicographically by their (sorted) pattern
//! tuples, which is also the order used for tie-breaking and for the set
//! index carried by the notification protocol.

use std::fmt;

use itertools::Itertools;
use rand::Rng;

use crate::error::{GpsmError, Result};

/// Default upper bound on `L` for exhaustive enumeration and random draws.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Checked binomial coefficient.
pub(crate) fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of ways to choose `n_iba` active antennas out of `n_r`.
pub fn count_combinations(n_r: usize, n_iba: usize) -> Result<u64> {
    if n_iba < 1 || n_iba > n_r {
        return Err(GpsmError::InvalidArgument(format!(
            "need 1 <= n_iba <= n_r, got n_r={n_r}, n_iba={n_iba}"
        )));
    }
    binomial(n_r as u128, n_iba as u128)
        .and_then(|c| u64::try_from(c).ok())
        .ok_or(GpsmError::Overflow("C(n_r, n_iba)"))
}

/// `floor(log2(c_t))`, computed on integers.
pub fn spatial_bits(c_t: u64) -> Result<u32> {
    if c_t < 1 {
        return Err(GpsmError::InvalidArgument(
            "pattern count must be at least 1".into(),
        ));
    }
    Ok(63 - c_t.leading_zeros())
}

/// Total bits per channel use, `K (k_ssk + n_iba log2 M)`.
pub fn throughput(k: usize, k_ssk: u32, n_iba: usize, m: usize) -> Result<u64> {
    if m < 2 || !m.is_power_of_two() {
        return Err(GpsmError::InvalidArgument(format!(
            "modulation order must be a power of two >= 2, got {m}"
        )));
    }
    let bits_per_symbol = m.trailing_zeros() as u64;
    Ok(k as u64 * (k_ssk as u64 + n_iba as u64 * bits_per_symbol))
}

/// A receive-antenna activation pattern.
///
/// Stored as the sorted, zero-based list of active antenna indices. Ordering
/// is lexicographic on that list, which matches the ordering of the one-based
/// index tuples `(i, j, ...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    active: Vec<usize>,
    n_r: usize,
}

impl Pattern {
    /// Builds a pattern from zero-based active antenna indices.
    pub fn new(n_r: usize, mut active: Vec<usize>) -> Result<Self> {
        active.sort_unstable();
        if active.is_empty() {
            return Err(GpsmError::InvalidArgument(
                "pattern needs at least one active antenna".into(),
            ));
        }
        if active.windows(2).any(|w| w[0] == w[1]) {
            return Err(GpsmError::InvalidArgument(format!(
                "duplicate antenna index in pattern {active:?}"
            )));
        }
        if active.last().is_some_and(|&i| i >= n_r) {
            return Err(GpsmError::InvalidArgument(format!(
                "antenna index out of range for n_r={n_r}: {active:?}"
            )));
        }
        Ok(Self { active, n_r })
    }

    /// Builds a pattern from its binary activation vector.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let active = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Self::new(bits.len(), active)
    }

    /// The pattern activating the first `n_iba` antennas.
    pub fn first(n_r: usize, n_iba: usize) -> Result<Self> {
        count_combinations(n_r, n_iba)?;
        Self::new(n_r, (0..n_iba).collect())
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_iba(&self) -> usize {
        self.active.len()
    }

    /// Zero-based active antenna indices, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, antenna: usize) -> bool {
        self.active.binary_search(&antenna).is_ok()
    }

    /// Binary activation vector of length `n_r`.
    pub fn bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.n_r];
        for &i in &self.active {
            bits[i] = true;
        }
        bits
    }

    /// Per-pattern cost `g^T q`.
    pub fn cost(&self, g: &[f64]) -> f64 {
        self.active.iter().map(|&i| g[i]).sum()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.active.iter().map(|i| i + 1).join(","))
    }
}

/// All patterns with `n_iba` of `n_r` antennas active, in ascending order.
pub fn enumerate_patterns(n_r: usize, n_iba: usize) -> Result<Vec<Pattern>> {
    count_combinations(n_r, n_iba)?;
    Ok((0..n_r)
        .combinations(n_iba)
        .map(|active| Pattern { active, n_r })
        .collect())
}

/// An ordered set of distinct patterns together with its mean pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
    counts: Vec<usize>,
    mean: Vec<f64>,
}

impl PatternSet {
    /// Builds a set; patterns are sorted into canonical order.
    ///
    /// The set size must be a power of two so that every pattern is reachable
    /// by a fixed number of spatial bits.
    pub fn new(mut patterns: Vec<Pattern>) -> Result<Self> {
        let first = patterns
            .first()
            .ok_or_else(|| GpsmError::InvalidArgument("empty pattern set".into()))?;
        let (n_r, n_iba) = (first.n_r, first.n_iba());
        if patterns
            .iter()
            .any(|p| p.n_r != n_r || p.n_iba() != n_iba)
        {
            return Err(GpsmError::InvalidArgument(
                "patterns in a set must share n_r and n_iba".into(),
            ));
        }
        if !patterns.len().is_power_of_two() {
            return Err(GpsmError::InvalidArgument(format!(
                "pattern set size must be a power of two, got {}",
                patterns.len()
            )));
        }
        patterns.sort();
        if patterns.windows(2).any(|w| w[0] == w[1]) {
            return Err(GpsmError::InvalidArgument(
                "pattern set contains duplicates".into(),
            ));
        }
        let mut counts = vec![0usize; n_r];
        for p in &patterns {
            for &i in &p.active {
                counts[i] += 1;
            }
        }
        // n_c is a power of two, so the division is exact.
        let n_c = patterns.len() as f64;
        let mean = counts.iter().map(|&c| c as f64 / n_c).collect();
        Ok(Self {
            patterns,
            counts,
            mean,
        })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn n_r(&self) -> usize {
        self.patterns[0].n_r
    }

    pub fn n_iba(&self) -> usize {
        self.patterns[0].n_iba()
    }

    /// Number of spatial bits the set carries, `log2(len)`.
    pub fn spatial_bits(&self) -> u32 {
        self.patterns.len().trailing_zeros()
    }

    /// Mean pattern `q̄`.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Numerators of the mean pattern over the common denominator `len()`.
    pub fn mean_counts(&self) -> &[usize] {
        &self.counts
    }
}

impl fmt::Display for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.patterns.iter().join(","))
    }
}

/// Mean pattern `q̄ = (1/n_c) Σ q_i` of a set.
pub fn mean_pattern(set: &PatternSet) -> Vec<f64> {
    set.mean.clone()
}

/// `g^T q̄` for a set.
pub fn set_cost(set: &PatternSet, g: &[f64]) -> Result<f64> {
    if g.len() != set.n_r() {
        return Err(GpsmError::DimensionMismatch {
            what: "column-energy vector",
            expected: set.n_r(),
            got: g.len(),
        });
    }
    Ok(g.iter().zip(&set.mean).map(|(a, b)| a * b).sum())
}

/// Combinatorial characteristics of a pattern space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternSpaceSpec {
    pub n_r: usize,
    pub n_iba: usize,
    /// `C(n_r, n_iba)`.
    pub c_t: u64,
    /// `floor(log2 c_t)`.
    pub k_ssk: u32,
    /// `2^k_ssk`.
    pub n_c: u64,
    /// `C(c_t, n_c)`; `None` when it does not fit in 128 bits.
    pub l: Option<u128>,
}

impl PatternSpaceSpec {
    pub fn new(n_r: usize, n_iba: usize) -> Result<Self> {
        let c_t = count_combinations(n_r, n_iba)?;
        let k_ssk = spatial_bits(c_t)?;
        let n_c = 1u64 << k_ssk;
        let l = binomial(c_t as u128, n_c as u128);
        Ok(Self {
            n_r,
            n_iba,
            c_t,
            k_ssk,
            n_c,
            l,
        })
    }

    /// `L` as a `u64`, provided it does not exceed `cap`.
    pub fn candidate_count(&self, cap: u64) -> Result<u64> {
        match self.l {
            Some(l) if l <= cap as u128 => Ok(l as u64),
            Some(l) => Err(GpsmError::EnumerationCapExceeded {
                l: l.to_string(),
                cap,
            }),
            None => Err(GpsmError::EnumerationCapExceeded {
                l: "> 2^128".into(),
                cap,
            }),
        }
    }

    pub fn patterns(&self) -> Vec<Pattern> {
        enumerate_patterns(self.n_r, self.n_iba).expect("validated at construction")
    }

    fn check_set(&self, set: &PatternSet) -> Result<()> {
        if set.n_r() != self.n_r || set.n_iba() != self.n_iba || set.len() as u64 != self.n_c {
            return Err(GpsmError::InvalidArgument(format!(
                "pattern set {set} does not belong to the space n_r={}, n_iba={}",
                self.n_r, self.n_iba
            )));
        }
        Ok(())
    }

    /// The candidate set with lexicographic rank `index` (unranking).
    pub fn set_at(&self, index: u64) -> Result<PatternSet> {
        let l = self.l.ok_or(GpsmError::Overflow("number of candidate sets"))?;
        if index as u128 >= l {
            return Err(GpsmError::IndexOutOfRange {
                index,
                l: u64::try_from(l).unwrap_or(u64::MAX),
            });
        }
        let all = self.patterns();
        let n = self.c_t as u128;
        let k = self.n_c as u128;
        let mut rest = index as u128;
        let mut chosen = Vec::with_capacity(self.n_c as usize);
        let mut next = 0u128;
        for pos in 0..k {
            loop {
                // Number of completions when `next` is taken at this position.
                let block = binomial(n - 1 - next, k - 1 - pos)
                    .ok_or(GpsmError::Overflow("set rank"))?;
                if rest < block {
                    break;
                }
                rest -= block;
                next += 1;
            }
            chosen.push(all[next as usize].clone());
            next += 1;
        }
        PatternSet::new(chosen)
    }

    /// Lexicographic rank of `set` among the candidate sets.
    pub fn index_of(&self, set: &PatternSet) -> Result<u64> {
        self.check_set(set)?;
        let all = self.patterns();
        let n = self.c_t as u128;
        let k = self.n_c as u128;
        let mut rank = 0u128;
        let mut next = 0u128;
        for (pos, p) in set.patterns().iter().enumerate() {
            let idx = all.binary_search(p).expect("pattern belongs to the space") as u128;
            for skipped in next..idx {
                rank += binomial(n - 1 - skipped, k - 1 - pos as u128)
                    .ok_or(GpsmError::Overflow("set rank"))?;
            }
            next = idx + 1;
        }
        u64::try_from(rank).map_err(|_| GpsmError::Overflow("set rank"))
    }

    /// Iterates all candidate sets in canonical order.
    pub fn candidate_sets(&self, cap: u64) -> Result<impl Iterator<Item = PatternSet>> {
        self.candidate_count(cap)?;
        let all = self.patterns();
        Ok(all
            .into_iter()
            .combinations(self.n_c as usize)
            .map(|c| PatternSet::new(c).expect("combinations are valid sets")))
    }
}

fn check_g(g: &[f64], spec: &PatternSpaceSpec) -> Result<()> {
    if g.len() != spec.n_r {
        return Err(GpsmError::DimensionMismatch {
            what: "column-energy vector",
            expected: spec.n_r,
            got: g.len(),
        });
    }
    if g.iter().any(|v| !(*v >= 0.0)) {
        return Err(GpsmError::InvalidArgument(
            "column energies must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// Minimum-cost pattern set, by per-pattern selection.
///
/// Set cost is the average of per-pattern costs, so the optimum consists of
/// the `n_c` patterns with the smallest `g^T q`; ties go to the pattern that
/// comes first canonically, which reproduces the exhaustive tie-break.
pub fn optimize_pattern_set(g: &[f64], spec: &PatternSpaceSpec) -> Result<PatternSet> {
    check_g(g, spec)?;
    let mut ranked: Vec<(f64, Pattern)> = spec
        .patterns()
        .into_iter()
        .map(|p| (p.cost(g), p))
        .collect();
    // Stable sort keeps canonical order among equal costs.
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    ranked.truncate(spec.n_c as usize);
    PatternSet::new(ranked.into_iter().map(|(_, p)| p).collect())
}

/// Minimum-cost pattern set by exhaustive enumeration of all `L` candidates.
pub fn optimize_pattern_set_exhaustive(
    g: &[f64],
    spec: &PatternSpaceSpec,
    cap: u64,
) -> Result<PatternSet> {
    check_g(g, spec)?;
    let mut best: Option<(f64, PatternSet)> = None;
    for set in spec.candidate_sets(cap)? {
        let cost = set_cost(&set, g)?;
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, set));
        }
    }
    Ok(best.expect("at least one candidate set").1)
}

/// A uniformly random candidate set.
pub fn random_pattern_set<R: Rng + ?Sized>(
    spec: &PatternSpaceSpec,
    cap: u64,
    rng: &mut R,
) -> Result<PatternSet> {
    let l = spec.candidate_count(cap)?;
    spec.set_at(rng.random_range(0..l))
}
