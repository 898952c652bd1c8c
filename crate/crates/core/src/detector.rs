//! Joint ML detection of the active-antenna pattern and the symbol vector.
//!
//! The metric `‖y − √E U b‖²` splits over antennas: active antennas
//! contribute `|y_i − √E b_i|²` and inactive ones `|y_i|²`. The best symbol on
//! an active antenna therefore does not depend on the rest of the pattern, and
//! each candidate pattern is scored from per-antenna terms computed once.

use num_complex::Complex64;

use crate::error::{GpsmError, Result};
use crate::modem::{position_matrix, Constellation};
use crate::pattern_space::PatternSet;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub pattern_index: usize,
    /// Constellation labels of the detected symbols.
    pub labels: Vec<usize>,
    pub symbols: Vec<Complex64>,
    /// `‖y − √E_k U b‖²` at the returned candidate.
    pub metric: f64,
}

fn check(y: &[Complex64], e_k: f64, set: &PatternSet) -> Result<()> {
    if set.is_empty() {
        return Err(GpsmError::InvalidArgument("empty pattern set".into()));
    }
    if y.len() != set.n_r() {
        return Err(GpsmError::DimensionMismatch {
            what: "received vector",
            expected: set.n_r(),
            got: y.len(),
        });
    }
    if !(e_k > 0.0) {
        return Err(GpsmError::InvalidArgument(format!(
            "symbol energy must be positive, got {e_k}"
        )));
    }
    Ok(())
}

/// ML detection by per-antenna decomposition.
///
/// Ties go to the smallest pattern index, then to the smallest symbol labels.
pub fn ml_detect(
    y: &[Complex64],
    e_k: f64,
    set: &PatternSet,
    c: &Constellation,
) -> Result<DetectionResult> {
    check(y, e_k, set)?;
    let mut scratch = DetectorScratch::new(y.len());
    let best_idx = scratch.detect(y, e_k.sqrt(), set, c);
    let q = &set.patterns()[best_idx];
    let labels: Vec<usize> = q.active().iter().map(|&i| scratch.best_label[i]).collect();
    let symbols: Vec<Complex64> = labels.iter().map(|&l| c.point(l)).collect();
    // Recompute the metric directly so it is exact for the returned candidate.
    let metric = candidate_metric(y, e_k.sqrt(), q.active(), &symbols);
    Ok(DetectionResult {
        pattern_index: best_idx,
        labels,
        symbols,
        metric,
    })
}

/// Reusable per-antenna buffers for the decomposed detector.
#[derive(Debug, Clone)]
pub(crate) struct DetectorScratch {
    /// Nearest constellation label per antenna.
    pub(crate) best_label: Vec<usize>,
    active_cost: Vec<f64>,
    inactive_cost: Vec<f64>,
}

impl DetectorScratch {
    pub(crate) fn new(n_r: usize) -> Self {
        Self {
            best_label: vec![0; n_r],
            active_cost: vec![0.0; n_r],
            inactive_cost: vec![0.0; n_r],
        }
    }

    /// Returns the detected pattern index; the symbol labels for antenna `i`
    /// are left in `best_label[i]`. Inputs must already be validated.
    pub(crate) fn detect(
        &mut self,
        y: &[Complex64],
        amp: f64,
        set: &PatternSet,
        c: &Constellation,
    ) -> usize {
        for (i, &yi) in y.iter().enumerate() {
            self.inactive_cost[i] = yi.norm_sqr();
            let mut best = f64::INFINITY;
            for (label, &p) in c.points().iter().enumerate() {
                let d = (yi - p * amp).norm_sqr();
                if d < best {
                    best = d;
                    self.best_label[i] = label;
                }
            }
            self.active_cost[i] = best;
        }
        let inactive_total: f64 = self.inactive_cost.iter().sum();
        let mut best_idx = 0;
        let mut best_metric = f64::INFINITY;
        for (idx, q) in set.patterns().iter().enumerate() {
            let metric = q.active().iter().fold(inactive_total, |acc, &i| {
                acc - self.inactive_cost[i] + self.active_cost[i]
            });
            if metric < best_metric {
                best_metric = metric;
                best_idx = idx;
            }
        }
        best_idx
    }
}

fn candidate_metric(y: &[Complex64], amp: f64, active: &[usize], b: &[Complex64]) -> f64 {
    let mut metric = 0.0;
    let mut slot = 0;
    for (i, &yi) in y.iter().enumerate() {
        if slot < active.len() && active[slot] == i {
            metric += (yi - b[slot] * amp).norm_sqr();
            slot += 1;
        } else {
            metric += yi.norm_sqr();
        }
    }
    metric
}

/// Exhaustive search over all `n_c · M^n_iba` candidates.
///
/// Candidates are visited by pattern index, then by symbol labels in
/// lexicographic order, and only a strictly smaller metric replaces the
/// incumbent, which gives the same tie-breaking as [`ml_detect`].
pub fn ml_detect_exhaustive(
    y: &[Complex64],
    e_k: f64,
    set: &PatternSet,
    c: &Constellation,
) -> Result<DetectionResult> {
    check(y, e_k, set)?;
    let amp = e_k.sqrt();
    let n_iba = set.n_iba();
    let m = c.order();
    let mut best: Option<DetectionResult> = None;
    for (idx, q) in set.patterns().iter().enumerate() {
        let u = position_matrix(q);
        let mut labels = vec![0usize; n_iba];
        loop {
            let b: Vec<Complex64> = labels.iter().map(|&l| c.point(l) * amp).collect();
            let s = u.apply(&b)?;
            let metric: f64 = y.iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum();
            if best.as_ref().is_none_or(|r| metric < r.metric) {
                best = Some(DetectionResult {
                    pattern_index: idx,
                    labels: labels.clone(),
                    symbols: labels.iter().map(|&l| c.point(l)).collect(),
                    metric,
                });
            }
            // Odometer increment, last position fastest.
            let mut pos = n_iba;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                labels[pos] += 1;
                if labels[pos] < m {
                    break;
                }
                labels[pos] = 0;
            }
            if labels.iter().all(|&l| l == 0) {
                break;
            }
        }
    }
    Ok(best.expect("nonempty search space"))
}
