//! System characteristics per number of information-bearing antennas.

use std::fmt::Write;

use gpsm_core::pattern_space::{throughput, PatternSpaceSpec};
use gpsm_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableRow {
    pub n_iba: usize,
    pub c_t: u64,
    pub n_c: u64,
    /// Bits per channel use for one user.
    pub r: u64,
    pub l: u128,
}

/// One row per `n_iba` in `1..=n_r`.
pub fn characteristics(n_r: usize, m: usize) -> Result<Vec<TableRow>> {
    (1..=n_r)
        .map(|n_iba| {
            let spec = PatternSpaceSpec::new(n_r, n_iba)?;
            Ok(TableRow {
                n_iba,
                c_t: spec.c_t,
                n_c: spec.n_c,
                r: throughput(1, spec.k_ssk, n_iba, m)?,
                l: spec
                    .l
                    .ok_or(gpsm_core::GpsmError::Overflow("number of candidate sets"))?,
            })
        })
        .collect()
}

/// Plain-text table; columns are whitespace separated.
pub fn render(n_r: usize, m: usize) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# N_r = {n_r}, M = {m}").unwrap();
    writeln!(out, "{:>5} {:>6} {:>6} {:>4} {:>12}", "N_iba", "C_t", "N_c", "R", "L").unwrap();
    for row in characteristics(n_r, m)? {
        writeln!(
            out,
            "{:>5} {:>6} {:>6} {:>4} {:>12}",
            row.n_iba, row.c_t, row.n_c, row.r, row.l
        )
        .unwrap();
    }
    Ok(out)
}
