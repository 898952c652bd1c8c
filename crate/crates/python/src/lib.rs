//! Python bindings: pattern spaces, modulation, ZF precoding, detection and
//! BER sweeps. Patterns are tuples of 0-based active antenna indices.

use gpsm_core::channel::{zero_forcing, ChannelRealization, CMatrix, DEFAULT_RCOND_THRESHOLD};
use gpsm_core::detector;
use gpsm_core::modem::make_constellation;
use gpsm_core::montecarlo::{sweep_points, BerRecord, PatternPolicy, SimScenario};
use gpsm_core::pattern_space::{self, Pattern, PatternSet, DEFAULT_ENUMERATION_CAP};
use gpsm_core::GpsmError;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: GpsmError) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn pattern_tuple(p: &Pattern) -> Vec<usize> {
    p.active().to_vec()
}

fn set_to_py(set: &PatternSet) -> Vec<Vec<usize>> {
    set.patterns().iter().map(pattern_tuple).collect()
}

fn set_from_py(n_r: usize, patterns: Vec<Vec<usize>>) -> PyResult<PatternSet> {
    let patterns = patterns
        .into_iter()
        .map(|a| Pattern::new(n_r, a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    PatternSet::new(patterns).map_err(to_py)
}

/// Combinatorics of the receive-antenna patterns for `n_r` antennas with
/// `n_iba` of them active.
#[pyclass(name = "PatternSpace", frozen)]
struct PyPatternSpace {
    inner: pattern_space::PatternSpaceSpec,
}

#[pymethods]
impl PyPatternSpace {
    #[new]
    fn new(n_r: usize, n_iba: usize) -> PyResult<Self> {
        Ok(Self {
            inner: pattern_space::PatternSpaceSpec::new(n_r, n_iba).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_r(&self) -> usize {
        self.inner.n_r
    }

    #[getter]
    fn n_iba(&self) -> usize {
        self.inner.n_iba
    }

    #[getter]
    fn c_t(&self) -> u64 {
        self.inner.c_t
    }

    #[getter]
    fn k_ssk(&self) -> u32 {
        self.inner.k_ssk
    }

    #[getter]
    fn n_c(&self) -> u64 {
        self.inner.n_c
    }

    /// Number of candidate sets, or None if it does not fit in 128 bits.
    #[getter]
    fn l(&self) -> Option<u128> {
        self.inner.l
    }

    fn patterns(&self) -> Vec<Vec<usize>> {
        self.inner.patterns().iter().map(pattern_tuple).collect()
    }

    /// Candidate set at canonical index `index`.
    fn set_at(&self, index: u64) -> PyResult<Vec<Vec<usize>>> {
        Ok(set_to_py(&self.inner.set_at(index).map_err(to_py)?))
    }

    fn index_of(&self, patterns: Vec<Vec<usize>>) -> PyResult<u64> {
        let set = set_from_py(self.inner.n_r, patterns)?;
        self.inner.index_of(&set).map_err(to_py)
    }

    /// Minimum-cost set for the column energies `g`.
    #[pyo3(signature = (g, exhaustive = false))]
    fn optimize(&self, g: Vec<f64>, exhaustive: bool) -> PyResult<Vec<Vec<usize>>> {
        let set = if exhaustive {
            pattern_space::optimize_pattern_set_exhaustive(&g, &self.inner, DEFAULT_ENUMERATION_CAP)
        } else {
            pattern_space::optimize_pattern_set(&g, &self.inner)
        }
        .map_err(to_py)?;
        Ok(set_to_py(&set))
    }

    fn __repr__(&self) -> String {
        format!(
            "PatternSpace(n_r={}, n_iba={}, c_t={}, n_c={}, l={})",
            self.inner.n_r,
            self.inner.n_iba,
            self.inner.c_t,
            self.inner.n_c,
            self.inner.l.map_or("overflow".to_string(), |l| l.to_string())
        )
    }
}

/// Constellation points indexed by label (2: BPSK, 4: Gray QPSK).
#[pyfunction]
fn constellation(m: usize) -> PyResult<Vec<Complex64>> {
    Ok(make_constellation(m).map_err(to_py)?.points().to_vec())
}

/// ZF precoder `H^H (H H^H)^{-1}` for a stacked channel given as rows.
#[pyfunction]
#[pyo3(signature = (h, users, n_r, rcond_threshold = DEFAULT_RCOND_THRESHOLD))]
fn zf_precoder(
    h: Vec<Vec<Complex64>>,
    users: usize,
    n_r: usize,
    rcond_threshold: f64,
) -> PyResult<Vec<Vec<Complex64>>> {
    let rows = h.len();
    let cols = h.first().map_or(0, Vec::len);
    if h.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("channel rows must have equal length"));
    }
    let m = CMatrix::from_fn(rows, cols, |i, j| h[i][j]);
    let channel = ChannelRealization::new(m, users, n_r).map_err(to_py)?;
    let p = zero_forcing(&channel, rcond_threshold).map_err(to_py)?.p;
    Ok((0..p.nrows())
        .map(|i| p.row(i).iter().copied().collect())
        .collect())
}

/// Joint ML detection; returns `(pattern_index, labels, metric)`.
#[pyfunction]
#[pyo3(signature = (y, e_k, pattern_set, m = 4, exhaustive = false))]
fn ml_detect(
    y: Vec<Complex64>,
    e_k: f64,
    pattern_set: Vec<Vec<usize>>,
    m: usize,
    exhaustive: bool,
) -> PyResult<(usize, Vec<usize>, f64)> {
    let set = set_from_py(y.len(), pattern_set)?;
    let c = make_constellation(m).map_err(to_py)?;
    let det = if exhaustive {
        detector::ml_detect_exhaustive(&y, e_k, &set, &c)
    } else {
        detector::ml_detect(&y, e_k, &set, &c)
    }
    .map_err(to_py)?;
    Ok((det.pattern_index, det.labels, det.metric))
}

fn record_dict<'py>(py: Python<'py>, r: &BerRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("snr_db", r.snr_db)?;
    d.set_item("ber", r.ber)?;
    d.set_item("bits_sent", r.bits_sent)?;
    d.set_item("bit_errors", r.bit_errors)?;
    d.set_item("spatial_bit_errors", r.spatial_bit_errors)?;
    d.set_item("symbol_bit_errors", r.symbol_bit_errors)?;
    d.set_item("per_user_ber", r.per_user_ber.clone())?;
    d.set_item("notification_failures", r.notification_failures)?;
    d.set_item("rejected_channels", r.rejected_channels)?;
    Ok(d)
}

/// Monte Carlo BER sweep; one dict per SNR point.
#[pyfunction]
#[pyo3(signature = (
    users, tx_antennas, rx_antennas, iba, snr_db,
    modulation = 4, realizations = 100, vectors_per_frame = 3200,
    pattern_policy = "optimized", repetitions = 10, seed = 0, workers = None,
))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    users: usize,
    tx_antennas: usize,
    rx_antennas: usize,
    iba: usize,
    snr_db: Vec<f64>,
    modulation: usize,
    realizations: usize,
    vectors_per_frame: usize,
    pattern_policy: &str,
    repetitions: usize,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let policy = match pattern_policy {
        "random" => PatternPolicy::Random,
        "optimized" => PatternPolicy::Optimized,
        "optimized_notified" => PatternPolicy::OptimizedNotified { repetitions },
        other => match other.strip_prefix("fixed:").map(str::parse) {
            Some(Ok(i)) => PatternPolicy::Fixed(i),
            _ => {
                return Err(PyValueError::new_err(format!(
                    "unknown pattern_policy '{other}' (random, optimized, optimized_notified, fixed:<index>)"
                )))
            }
        },
    };
    let scn = SimScenario {
        snr_grid_db: snr_db,
        channel_realizations: realizations,
        vectors_per_frame,
        pattern_policy: policy,
        master_seed: seed,
        workers,
        ..SimScenario::new(users, tx_antennas, rx_antennas, iba, modulation)
    };
    scn.validate().map_err(to_py)?;
    let records = py
        .detach(|| sweep_points(&scn, &scn.snr_grid_db))
        .map_err(to_py)?;
    records.iter().map(|r| record_dict(py, r)).collect()
}

/// `(n_iba, c_t, n_c, r, l)` for every `n_iba` in `1..=n_r`.
type TableRow = (usize, u64, u64, u64, Option<u128>);

#[pyfunction]
#[pyo3(signature = (n_r, m = 4))]
fn table(n_r: usize, m: usize) -> PyResult<Vec<TableRow>> {
    (1..=n_r)
        .map(|n_iba| {
            let spec = pattern_space::PatternSpaceSpec::new(n_r, n_iba).map_err(to_py)?;
            let r = pattern_space::throughput(1, spec.k_ssk, n_iba, m).map_err(to_py)?;
            Ok((n_iba, spec.c_t, spec.n_c, r, spec.l))
        })
        .collect()
}

#[pymodule]
fn gpsm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPatternSpace>()?;
    m.add_function(wrap_pyfunction!(constellation, m)?)?;
    m.add_function(wrap_pyfunction!(zf_precoder, m)?)?;
    m.add_function(wrap_pyfunction!(ml_detect, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
