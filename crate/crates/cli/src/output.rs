//! Result files: CSV or JSON records plus a metadata sidecar.
//!
//! The record file only holds data that is a function of the configuration,
//! so repeated runs with the same seed produce byte-identical files. Wall time
//! and the version string go to `<output>.meta.json`.

use std::io::Write;
use std::path::{Path, PathBuf};

use gpsm_core::montecarlo::{records_snr_at_ber, BerRecord};
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::CliError;

pub const CSV_HEADER: [&str; 9] = [
    "snr_db",
    "ber",
    "bits_sent",
    "bit_errors",
    "spatial_bit_errors",
    "symbol_bit_errors",
    "per_user_ber",
    "notification_failures",
    "rejected_channels",
];

/// Version string of this build, `git describe` output when available.
pub const VERSION: &str = env!("GPSM_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub records: usize,
    /// TOML echo of the effective configuration.
    pub config: String,
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    #[serde(with = "snr_repr")]
    snr_db: f64,
    ber: f64,
    bits_sent: u64,
    bit_errors: u64,
    spatial_bit_errors: u64,
    symbol_bit_errors: u64,
    per_user_ber: Vec<f64>,
    notification_failures: u64,
    rejected_channels: u64,
}

/// JSON has no infinities, so the noiseless point is written as the string "inf".
mod snr_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonFile {
    records: Vec<JsonRecord>,
}

impl From<&BerRecord> for JsonRecord {
    fn from(r: &BerRecord) -> Self {
        Self {
            snr_db: r.snr_db,
            ber: r.ber,
            bits_sent: r.bits_sent,
            bit_errors: r.bit_errors,
            spatial_bit_errors: r.spatial_bit_errors,
            symbol_bit_errors: r.symbol_bit_errors,
            per_user_ber: r.per_user_ber.clone(),
            notification_failures: r.notification_failures,
            rejected_channels: r.rejected_channels,
        }
    }
}

impl From<JsonRecord> for BerRecord {
    fn from(r: JsonRecord) -> Self {
        Self {
            snr_db: r.snr_db,
            ber: r.ber,
            bits_sent: r.bits_sent,
            bit_errors: r.bit_errors,
            spatial_bit_errors: r.spatial_bit_errors,
            symbol_bit_errors: r.symbol_bit_errors,
            per_user_ber: r.per_user_ber,
            notification_failures: r.notification_failures,
            rejected_channels: r.rejected_channels,
        }
    }
}

fn csv_row(r: &BerRecord) -> [String; 9] {
    let per_user: Vec<String> = r.per_user_ber.iter().map(f64::to_string).collect();
    [
        r.snr_db.to_string(),
        r.ber.to_string(),
        r.bits_sent.to_string(),
        r.bit_errors.to_string(),
        r.spatial_bit_errors.to_string(),
        r.symbol_bit_errors.to_string(),
        per_user.join(";"),
        r.notification_failures.to_string(),
        r.rejected_channels.to_string(),
    ]
}

/// Serializes the records in `format`.
pub fn render_records(records: &[BerRecord], format: OutputFormat) -> Result<Vec<u8>, CliError> {
    if records.is_empty() {
        return Err(CliError::Config("no records to emit".into()));
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let write_err = |e: csv::Error| CliError::Config(format!("CSV encoding failed: {e}"));
            w.write_record(CSV_HEADER).map_err(write_err)?;
            for r in records {
                w.write_record(csv_row(r)).map_err(write_err)?;
            }
            w.into_inner()
                .map_err(|e| CliError::Config(format!("CSV encoding failed: {e}")))
        }
        OutputFormat::Json => {
            let file = JsonFile {
                records: records.iter().map(JsonRecord::from).collect(),
            };
            let mut bytes = serde_json::to_vec_pretty(&file)
                .map_err(|e| CliError::Config(format!("JSON encoding failed: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the records to `path` (stdout when `None`) and the metadata next to
/// it (stderr when writing to stdout).
pub fn emit_results(
    records: &[BerRecord],
    format: OutputFormat,
    path: Option<&Path>,
    meta: &RunMetadata,
) -> Result<(), CliError> {
    let body = render_records(records, format)?;
    let meta_text = serde_json::to_string_pretty(meta)
        .map_err(|e| CliError::Config(format!("JSON encoding failed: {e}")))?
        + "\n";
    match path {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| CliError::io(p, e))?;
            let mp = metadata_path(p);
            std::fs::write(&mp, meta_text).map_err(|e| CliError::io(&mp, e))?;
        }
        None => {
            let stdout = Path::new("<stdout>");
            std::io::stdout()
                .write_all(&body)
                .map_err(|e| CliError::io(stdout, e))?;
            eprint!("{meta_text}");
        }
    }
    Ok(())
}

fn parse_csv(text: &str, path: &Path) -> Result<Vec<BerRecord>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::parse(path, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::parse(path, "unexpected CSV header"));
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| CliError::parse(path, e))?;
        let bad = |field: &str| CliError::parse(path, format!("row {}: bad {field}", line + 1));
        let float = |i: usize| row[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        let int = |i: usize| row[i].parse::<u64>().map_err(|_| bad(CSV_HEADER[i]));
        let per_user_ber = if row[6].is_empty() {
            Vec::new()
        } else {
            row[6]
                .split(';')
                .map(|s| s.parse::<f64>().map_err(|_| bad("per_user_ber")))
                .collect::<Result<_, _>>()?
        };
        out.push(BerRecord {
            snr_db: float(0)?,
            ber: float(1)?,
            bits_sent: int(2)?,
            bit_errors: int(3)?,
            spatial_bit_errors: int(4)?,
            symbol_bit_errors: int(5)?,
            per_user_ber,
            notification_failures: int(7)?,
            rejected_channels: int(8)?,
        });
    }
    Ok(out)
}

/// Parses records from CSV or JSON text; JSON is recognized by its leading `{`.
pub fn parse_records(text: &str, path: &Path) -> Result<Vec<BerRecord>, CliError> {
    if text.trim_start().starts_with('{') {
        let file: JsonFile = serde_json::from_str(text).map_err(|e| CliError::parse(path, e))?;
        Ok(file.records.into_iter().map(BerRecord::from).collect())
    } else {
        parse_csv(text, path)
    }
}

pub fn read_records(path: &Path) -> Result<Vec<BerRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_records(&text, path)
}

/// SNR gap in dB, curve `b` minus curve `a`, at `target_ber`.
pub fn compare_curves(path_a: &Path, path_b: &Path, target_ber: f64) -> Result<f64, CliError> {
    let a = records_snr_at_ber(&read_records(path_a)?, target_ber)?;
    let b = records_snr_at_ber(&read_records(path_b)?, target_ber)?;
    Ok(b - a)
}

/// Gnuplot script plotting BER against SNR for the given CSV files.
pub fn gnuplot_script(csv_paths: &[&Path]) -> String {
    let mut s = String::from(
        "set datafile separator ','\n\
         set logscale y\n\
         set format y '10^{%L}'\n\
         set xlabel 'SNR (dB)'\n\
         set ylabel 'BER'\n\
         set grid\n\
         plot ",
    );
    let plots: Vec<String> = csv_paths
        .iter()
        .map(|p| {
            let name = p.display().to_string().replace('\'', "");
            format!("'{name}' using 1:2 skip 1 with linespoints title '{name}'")
        })
        .collect();
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(snr: f64, ber: f64) -> BerRecord {
        BerRecord {
            snr_db: snr,
            bits_sent: 19_200,
            bit_errors: (ber * 19_200.0) as u64,
            ber,
            per_user_ber: vec![ber, ber / 3.0],
            spatial_bit_errors: 3,
            symbol_bit_errors: 4,
            notification_failures: 1,
            rejected_channels: 0,
        }
    }

    #[test]
    fn one_record_is_two_csv_lines() {
        let text = String::from_utf8(render_records(&[record(2.0, 0.125)], OutputFormat::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "2,0.125,19200,2400,3,4,0.125;0.041666666666666664,1,0");
    }

    #[test]
    fn roundtrips_are_exact() {
        let recs = vec![record(0.0, 0.1 / 3.0), record(f64::INFINITY, 0.0), record(-2.5, 1e-7)];
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let bytes = render_records(&recs, format).unwrap();
            let back = parse_records(std::str::from_utf8(&bytes).unwrap(), Path::new("x")).unwrap();
            assert_eq!(back, recs, "{format:?}");
        }
    }

    #[test]
    fn empty_records_rejected() {
        assert!(render_records(&[], OutputFormat::Csv).is_err());
    }

    #[test]
    fn metadata_sits_next_to_output() {
        assert_eq!(metadata_path(Path::new("out/a.csv")), Path::new("out/a.csv.meta.json"));
    }

    #[test]
    fn gnuplot_mentions_every_file() {
        let s = gnuplot_script(&[Path::new("a.csv"), Path::new("b.csv")]);
        assert!(s.contains("'a.csv'") && s.contains("'b.csv'") && s.contains("logscale y"));
    }
}
