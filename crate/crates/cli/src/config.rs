//! Run configuration: presets, TOML files and command-line overrides.
//!
//! Values are layered preset → file → flags. Every key is optional in each
//! layer, but after merging `users`, `tx_antennas`, `rx_antennas` and `iba`
//! must be present.

use std::path::{Path, PathBuf};

use gpsm_core::montecarlo::{NotificationTiming, PatternPolicy, SimScenario};
use gpsm_core::pattern_space::DEFAULT_ENUMERATION_CAP;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// One configuration layer. Every field is optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub preset: Option<String>,
    pub users: Option<usize>,
    pub tx_antennas: Option<usize>,
    pub rx_antennas: Option<usize>,
    pub iba: Option<usize>,
    pub modulation: Option<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub realizations: Option<usize>,
    pub vectors_per_frame: Option<usize>,
    /// `fixed`, `random`, `optimized` or `optimized_notified`.
    pub pattern_policy: Option<String>,
    /// Canonical set index used by the `fixed` policy.
    pub fixed_set: Option<u64>,
    pub repetitions: Option<usize>,
    /// `same_frame` or `pipelined`.
    pub notification_timing: Option<String>,
    pub seed: Option<u64>,
    pub eps: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub enumeration_cap: Option<u64>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )+
    };
}

impl ConfigLayer {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(&mut self, top: &ConfigLayer) {
        overlay!(
            self, top, preset, users, tx_antennas, rx_antennas, iba, modulation, snr_db,
            realizations, vectors_per_frame, pattern_policy, fixed_set, repetitions,
            notification_timing, seed, eps, workers, enumeration_cap, format, output, gnuplot
        );
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// Default SNR grid: 0 to 24 dB in 2 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=12).map(|i| 2.0 * i as f64).collect()
}

/// Named configurations for the published figures.
pub fn preset(name: &str) -> Result<ConfigLayer, CliError> {
    let base = |users, tx, rx, policy: &str| ConfigLayer {
        users: Some(users),
        tx_antennas: Some(tx),
        rx_antennas: Some(rx),
        iba: Some(2),
        modulation: Some(4),
        pattern_policy: Some(policy.to_string()),
        ..ConfigLayer::default()
    };
    let layer = match name {
        "fig1a" => base(1, 8, 4, "random"),
        "fig1b" => base(1, 10, 5, "random"),
        "fig2" => base(1, 8, 4, "optimized"),
        "fig3" => base(2, 8, 4, "optimized"),
        "fig4" => ConfigLayer {
            repetitions: Some(10),
            ..base(2, 8, 4, "optimized_notified")
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}' (expected one of: {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(layer)
}

pub const PRESETS: [&str; 5] = ["fig1a", "fig1b", "fig2", "fig3", "fig4"];

/// Builds a configuration from an optional TOML file overlaid by flags.
pub fn parse_config(file: Option<&Path>, flags: &ConfigLayer) -> Result<RunConfig, CliError> {
    let mut layers = Vec::with_capacity(2);
    if let Some(path) = file {
        layers.push(ConfigLayer::from_file(path)?);
    }
    layers.push(flags.clone());
    RunConfig::from_layers(&layers)
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub scenario: SimScenario,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
}

fn required<T: Copy>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
}

impl RunConfig {
    /// Merges the layers (later ones win) and validates the result.
    pub fn from_layers(layers: &[ConfigLayer]) -> Result<Self, CliError> {
        let mut merged = ConfigLayer::default();
        for layer in layers {
            if let Some(name) = &layer.preset {
                merged.overlay(&preset(name)?);
            }
            merged.overlay(layer);
        }
        Self::from_layer(&merged)
    }

    fn from_layer(c: &ConfigLayer) -> Result<Self, CliError> {
        let users = required(c.users, "users")?;
        let n_t = required(c.tx_antennas, "tx_antennas")?;
        let n_r = required(c.rx_antennas, "rx_antennas")?;
        let n_iba = required(c.iba, "iba")?;
        let m = c.modulation.unwrap_or(4);
        if users == 0 {
            return Err(CliError::Config("key 'users' must be at least 1".into()));
        }
        if n_t < users * n_r {
            return Err(CliError::Config(format!(
                "key 'tx_antennas' must satisfy n_t >= K·N_r: {n_t} < {users}·{n_r}"
            )));
        }
        if n_iba < 1 || n_iba > n_r {
            return Err(CliError::Config(format!(
                "key 'iba' must satisfy 1 <= iba <= rx_antennas, got {n_iba} with rx_antennas = {n_r}"
            )));
        }
        if m != 2 && m != 4 {
            return Err(CliError::Config(format!(
                "key 'modulation' must be 2 or 4, got {m}"
            )));
        }
        let repetitions = c.repetitions.unwrap_or(10);
        let pattern_policy = match c.pattern_policy.as_deref().unwrap_or("optimized") {
            "fixed" => PatternPolicy::Fixed(c.fixed_set.unwrap_or(0)),
            "random" => PatternPolicy::Random,
            "optimized" => PatternPolicy::Optimized,
            "optimized_notified" => {
                if repetitions == 0 {
                    return Err(CliError::Config(
                        "key 'repetitions' must be at least 1".into(),
                    ));
                }
                PatternPolicy::OptimizedNotified { repetitions }
            }
            other => {
                return Err(CliError::Config(format!(
                    "key 'pattern_policy' must be one of fixed, random, optimized, \
                     optimized_notified; got '{other}'"
                )))
            }
        };
        let notification_timing = match c.notification_timing.as_deref().unwrap_or("same_frame") {
            "same_frame" => NotificationTiming::SameFrame,
            "pipelined" => NotificationTiming::Pipelined,
            other => {
                return Err(CliError::Config(format!(
                    "key 'notification_timing' must be same_frame or pipelined; got '{other}'"
                )))
            }
        };
        let scenario = SimScenario {
            k_users: users,
            n_t,
            n_r,
            n_iba,
            m,
            eps: c.eps.clone().unwrap_or_else(|| vec![1.0; users]),
            snr_grid_db: c.snr_db.clone().unwrap_or_else(default_snr_grid),
            channel_realizations: c.realizations.unwrap_or(1_000),
            vectors_per_frame: c.vectors_per_frame.unwrap_or(3_200),
            pattern_policy,
            master_seed: c.seed.unwrap_or(0),
            notification_timing,
            enumeration_cap: c.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
            rcond_threshold: gpsm_core::channel::DEFAULT_RCOND_THRESHOLD,
            workers: c.workers,
        };
        scenario
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            preset: c.preset.clone(),
            scenario,
            format: c.format.unwrap_or_default(),
            output: c.output.clone(),
            gnuplot: c.gnuplot.clone(),
        })
    }

    /// The configuration as a fully populated layer.
    pub fn to_layer(&self) -> ConfigLayer {
        let s = &self.scenario;
        let (policy, fixed_set, repetitions) = match s.pattern_policy {
            PatternPolicy::Fixed(i) => ("fixed", Some(i), None),
            PatternPolicy::Random => ("random", None, None),
            PatternPolicy::Optimized => ("optimized", None, None),
            PatternPolicy::OptimizedNotified { repetitions } => {
                ("optimized_notified", None, Some(repetitions))
            }
        };
        ConfigLayer {
            // Presets are already folded into the values below.
            preset: None,
            users: Some(s.k_users),
            tx_antennas: Some(s.n_t),
            rx_antennas: Some(s.n_r),
            iba: Some(s.n_iba),
            modulation: Some(s.m),
            snr_db: Some(s.snr_grid_db.clone()),
            realizations: Some(s.channel_realizations),
            vectors_per_frame: Some(s.vectors_per_frame),
            pattern_policy: Some(policy.to_string()),
            fixed_set,
            repetitions,
            notification_timing: Some(
                match s.notification_timing {
                    NotificationTiming::SameFrame => "same_frame",
                    NotificationTiming::Pipelined => "pipelined",
                }
                .to_string(),
            ),
            seed: Some(s.master_seed),
            eps: Some(s.eps.clone()),
            workers: s.workers,
            enumeration_cap: Some(s.enumeration_cap),
            format: Some(self.format),
            output: self.output.clone(),
            gnuplot: self.gnuplot.clone(),
        }
    }

    /// TOML echo of the configuration, suitable for re-parsing.
    pub fn echo(&self) -> String {
        toml::to_string(&self.to_layer()).expect("configuration serializes")
    }
}
