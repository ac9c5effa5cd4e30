//! Experiment configuration with table defaults, named presets, and strict
//! validation (unknown keys and out-of-range values are rejected by field
//! name, before anything runs).

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{dbm_per_hz_to_watts_per_hz, Band, BandParams, RadioParams};
use crate::scheduler::PolicyKind;
use crate::traffic::ScenarioConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown preset `{0}` (expected fig2..fig6)")]
    UnknownPreset(String),
    #[error("unknown policy `{0}` (expected context, csi, or both)")]
    UnknownPolicy(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidField {
        field,
        reason: reason.into(),
    }
}

/// Per-band radio knobs as written in config files. Gains and noise are in
/// dB units here and converted once when building [`RadioParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandConfig {
    pub tx_power_w: f64,
    pub total_bandwidth_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub pathloss_exponent: f64,
    pub pathloss_intercept_db: f64,
    pub shadowing_std_db: f64,
    pub antenna_gain_db: f64,
    pub noise_density_dbm_per_hz: f64,
}

impl BandConfig {
    fn mmw_table_defaults() -> Self {
        Self {
            tx_power_w: 1.0,
            total_bandwidth_hz: 1e9,
            rb_bandwidth_hz: 480e3,
            pathloss_exponent: 2.0,
            pathloss_intercept_db: 70.0,
            shadowing_std_db: 5.2,
            antenna_gain_db: 18.0,
            noise_density_dbm_per_hz: -174.0,
        }
    }

    fn muw_table_defaults() -> Self {
        Self {
            tx_power_w: 1.0,
            total_bandwidth_hz: 10e6,
            rb_bandwidth_hz: 480e3,
            pathloss_exponent: 3.0,
            pathloss_intercept_db: 38.0,
            shadowing_std_db: 10.0,
            antenna_gain_db: 0.0,
            noise_density_dbm_per_hz: -174.0,
        }
    }

    fn to_params(&self, band: Band) -> Result<RadioParams, ConfigError> {
        RadioParams::new(
            band,
            self.tx_power_w,
            self.total_bandwidth_hz,
            self.rb_bandwidth_hz,
            self.pathloss_exponent,
            self.pathloss_intercept_db,
            self.shadowing_std_db,
            10f64.powf(self.antenna_gain_db / 10.0),
            dbm_per_hz_to_watts_per_hz(self.noise_density_dbm_per_hz),
        )
        .map_err(|e| invalid("radio", e.to_string()))
    }
}

impl Default for BandConfig {
    fn default() -> Self {
        Self::muw_table_defaults()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub mmw: BandConfig,
    pub muw: BandConfig,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            mmw: BandConfig::mmw_table_defaults(),
            muw: BandConfig::muw_table_defaults(),
        }
    }
}

/// Which policies a campaign evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    Context,
    Csi,
    Both,
}

impl PolicyChoice {
    pub fn kinds(&self) -> Vec<PolicyKind> {
        match self {
            PolicyChoice::Context => vec![PolicyKind::ContextAware],
            PolicyChoice::Csi => vec![PolicyKind::CsiBaseline],
            PolicyChoice::Both => vec![PolicyKind::ContextAware, PolicyKind::CsiBaseline],
        }
    }
}

impl FromStr for PolicyChoice {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "context" => Ok(PolicyChoice::Context),
            "csi" => Ok(PolicyChoice::Csi),
            "both" => Ok(PolicyChoice::Both),
            other => Err(ConfigError::UnknownPolicy(other.to_string())),
        }
    }
}

/// Which scenario knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    LoadBits,
    LosProbability,
    UeCount,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

/// Named parameter sets for the standard experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }

    /// Overwrite the scenario/sweep/policy knobs with this preset's values.
    /// Seed, replication count, and radio parameters are left alone.
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        cfg.preset = Some(*self);
        match self {
            // Per-slot band offload at two LoS probabilities.
            Preset::Fig2 => {
                cfg.scenario.ue_count = 20;
                cfg.scenario.apps_per_ue = 5;
                cfg.scenario.class_count = 5;
                cfg.scenario.load_bits = 0.5e6;
                cfg.policies = PolicyChoice::Context;
                cfg.sweep = Some(SweepSpec {
                    axis: SweepAxis::LosProbability,
                    grid: vec![0.1, 0.5],
                });
            }
            // Violation rate versus per-app load, both policies.
            Preset::Fig3 => {
                cfg.scenario.ue_count = 10;
                cfg.scenario.apps_per_ue = 3;
                cfg.scenario.class_count = 5;
                cfg.scenario.los_probability = 0.3;
                cfg.policies = PolicyChoice::Both;
                cfg.sweep = Some(SweepSpec {
                    axis: SweepAxis::LoadBits,
                    grid: (1..=7).map(|i| i as f64 * 0.1e6).collect(),
                });
            }
            // Violation-rate CDFs for edge/center cohorts, no LoS.
            Preset::Fig4 => {
                cfg.scenario.ue_count = 20;
                cfg.scenario.apps_per_ue = 3;
                cfg.scenario.class_count = 5;
                cfg.scenario.load_bits = 0.1e6;
                cfg.scenario.los_probability = 0.0;
                cfg.policies = PolicyChoice::Both;
                cfg.sweep = None;
            }
            // Same cohort CDFs with LoS probability 0.3.
            Preset::Fig5 => {
                Preset::Fig4.apply(cfg);
                cfg.preset = Some(Preset::Fig5);
                cfg.scenario.los_probability = 0.3;
            }
            // Matching effort versus network size, with and without LoS.
            Preset::Fig6 => {
                cfg.scenario.apps_per_ue = 3;
                cfg.scenario.class_count = 5;
                cfg.scenario.load_bits = 0.5e6;
                cfg.policies = PolicyChoice::Context;
                cfg.sweep = Some(SweepSpec {
                    axis: SweepAxis::UeCount,
                    grid: vec![5.0, 10.0, 15.0, 20.0, 25.0],
                });
            }
        }
    }
}

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "fig6" => Ok(Preset::Fig6),
            other => Err(ConfigError::UnknownPreset(other.to_string())),
        }
    }
}

/// A full campaign description. An empty config file yields the table
/// defaults for everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub radio: RadioConfig,
    pub replications: usize,
    pub seed: u64,
    pub policies: PolicyChoice,
    pub sweep: Option<SweepSpec>,
    pub preset: Option<Preset>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            radio: RadioConfig::default(),
            replications: 200,
            seed: 1,
            policies: PolicyChoice::Both,
            sweep: None,
            preset: None,
        }
    }
}

impl ExperimentConfig {
    /// Parse a JSON config file; missing keys fall back to defaults,
    /// unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    /// Band parameter pair for the runs, validated.
    pub fn band_params(&self) -> Result<BandParams, ConfigError> {
        Ok(BandParams {
            mmw: self.radio.mmw.to_params(Band::MmWave)?,
            muw: self.radio.muw.to_params(Band::MicroWave)?,
        })
    }

    /// Field-by-field range checks; called before any run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scenario;
        if s.ue_count < 1 {
            return Err(invalid("scenario.ue_count", "must be >= 1"));
        }
        if s.apps_per_ue < 1 {
            return Err(invalid("scenario.apps_per_ue", "must be >= 1"));
        }
        if s.class_count < 1 {
            return Err(invalid("scenario.class_count", "must be >= 1"));
        }
        if !s.load_bits.is_finite() || s.load_bits < 0.0 {
            return Err(invalid("scenario.load_bits", "must be a finite value >= 0"));
        }
        if !(0.0..=1.0).contains(&s.los_probability) {
            return Err(invalid("scenario.los_probability", "must lie in [0, 1]"));
        }
        if !s.min_distance_m.is_finite() || s.min_distance_m <= 0.0 {
            return Err(invalid("scenario.min_distance_m", "must be > 0"));
        }
        if s.coverage_radius_m <= s.min_distance_m {
            return Err(invalid(
                "scenario.coverage_radius_m",
                format!("must exceed min_distance_m = {}", s.min_distance_m),
            ));
        }
        if !s.slot_duration_s.is_finite() || s.slot_duration_s <= 0.0 {
            return Err(invalid("scenario.slot_duration_s", "must be > 0"));
        }
        if self.replications < 1 {
            return Err(invalid("replications", "must be >= 1"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.grid.is_empty() {
                return Err(invalid("sweep.grid", "must not be empty"));
            }
            for &v in &sweep.grid {
                let ok = match sweep.axis {
                    SweepAxis::LoadBits => v >= 0.0 && v.is_finite(),
                    SweepAxis::LosProbability => (0.0..=1.0).contains(&v),
                    SweepAxis::UeCount => v >= 1.0 && v.fract() == 0.0,
                };
                if !ok {
                    return Err(invalid("sweep.grid", format!("value {} out of range", v)));
                }
            }
        }
        self.band_params()?;
        Ok(())
    }
}
