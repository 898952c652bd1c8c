//! Command-line front end for the GPSM downlink simulator.
//!
//! Subcommands: `run` simulates a scenario and writes BER records, `table`
//! prints the pattern-space characteristics, `compare` measures the SNR gap
//! between two result files.

pub mod config;
pub mod error;
pub mod output;
pub mod table;

use std::time::Instant;

use gpsm_core::montecarlo::{snr_sweep, BerRecord};

pub use config::{parse_config, ConfigLayer, OutputFormat, RunConfig};
pub use error::CliError;
pub use output::{compare_curves, emit_results, read_records, RunMetadata};

/// Runs the configured sweep and returns the records with their metadata.
pub fn execute(cfg: &RunConfig) -> Result<(Vec<BerRecord>, RunMetadata), CliError> {
    let start = Instant::now();
    let records = snr_sweep(&cfg.scenario)?;
    let meta = RunMetadata {
        version: output::VERSION.to_string(),
        seed: cfg.scenario.master_seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        records: records.len(),
        config: cfg.echo(),
    };
    Ok((records, meta))
}
