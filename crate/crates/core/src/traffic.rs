//! Scenario generation and the per-app transmission ledger.
//!
//! A scenario fixes the geometry (UE positions in an annulus around the
//! base station), the LoS blockage state, and the app population with its
//! delay classes. Class `t` apps must receive the full `B` bits within the
//! first `t` slots; the ledger tracks cumulative delivered bits per app and
//! flips apps to satisfied or expired.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Band, Position};
use crate::rng::{stream, stream_rng};

#[derive(Debug, Error, PartialEq)]
pub enum TrafficError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
}

/// Index of a user equipment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UeId(pub usize);

/// Index of a user application, the schedulable unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UaId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserEquipment {
    pub id: UeId,
    pub position: Position,
    /// Whether a usable line-of-sight mmWave link exists this run.
    pub los: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserApp {
    pub id: UaId,
    pub ue: UeId,
    /// Delay class: the app tolerates delivery within this many slots (1-based).
    pub qos_class: usize,
}

/// Knobs of [`generate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub ue_count: usize,
    pub apps_per_ue: usize,
    /// Number of delay classes; also the scheduling horizon in slots.
    pub class_count: usize,
    /// Bits each app must receive.
    pub load_bits: f64,
    pub los_probability: f64,
    pub coverage_radius_m: f64,
    pub min_distance_m: f64,
    /// Microwave slot duration in seconds.
    pub slot_duration_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            ue_count: 20,
            apps_per_ue: 5,
            class_count: 5,
            load_bits: 0.5e6,
            los_probability: 0.5,
            coverage_radius_m: 250.0,
            min_distance_m: 5.0,
            slot_duration_s: 10e-3,
        }
    }
}

/// Immutable problem instance for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub coverage_radius_m: f64,
    pub min_distance_m: f64,
    pub los_probability: f64,
    pub ues: Vec<UserEquipment>,
    pub apps: Vec<UserApp>,
    /// Number of delay classes `T`; also the horizon in slots.
    pub class_count: usize,
    pub load_bits: f64,
    pub slot_duration_s: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn ue_count(&self) -> usize {
        self.ues.len()
    }

    pub fn app_count(&self) -> usize {
        self.apps.len()
    }

    pub fn app(&self, a: UaId) -> &UserApp {
        &self.apps[a.0]
    }

    pub fn ue_of(&self, a: UaId) -> &UserEquipment {
        &self.ues[self.apps[a.0].ue.0]
    }

    /// Apps in delay class `t`.
    pub fn class_members(&self, t: usize) -> impl Iterator<Item = &UserApp> {
        self.apps.iter().filter(move |a| a.qos_class == t)
    }

    /// Smallest delay class among the apps of each UE: the delay the
    /// CSI-only scheduler attributes to every app of that UE.
    pub fn min_class_per_ue(&self) -> Vec<usize> {
        let mut min_class = vec![usize::MAX; self.ues.len()];
        for app in &self.apps {
            let slot = &mut min_class[app.ue.0];
            *slot = (*slot).min(app.qos_class);
        }
        min_class
    }
}

/// Generate a scenario: positions uniform over the annulus
/// `[min_distance, coverage_radius]`, LoS Bernoulli per UE, classes uniform
/// over `1..=T`. Fully determined by the seed.
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario, TrafficError> {
    if config.ue_count < 1 {
        return Err(TrafficError::InvalidConfig("ue_count must be >= 1".into()));
    }
    if config.apps_per_ue < 1 {
        return Err(TrafficError::InvalidConfig(
            "apps_per_ue must be >= 1".into(),
        ));
    }
    if config.class_count < 1 {
        return Err(TrafficError::InvalidConfig(
            "class_count must be >= 1".into(),
        ));
    }
    if !config.load_bits.is_finite() || config.load_bits < 0.0 {
        return Err(TrafficError::InvalidConfig("load_bits must be >= 0".into()));
    }
    if !(0.0..=1.0).contains(&config.los_probability) {
        return Err(TrafficError::InvalidConfig(
            "los_probability must be in [0, 1]".into(),
        ));
    }
    if !config.min_distance_m.is_finite() || config.min_distance_m <= 0.0 {
        return Err(TrafficError::InvalidConfig(
            "min_distance_m must be > 0".into(),
        ));
    }
    if config.coverage_radius_m <= config.min_distance_m {
        return Err(TrafficError::InvalidConfig(format!(
            "coverage_radius_m must exceed the {} m minimum distance",
            config.min_distance_m
        )));
    }
    if !config.slot_duration_s.is_finite() || config.slot_duration_s <= 0.0 {
        return Err(TrafficError::InvalidConfig(
            "slot_duration_s must be > 0".into(),
        ));
    }

    let mut rng = stream_rng(seed, &[stream::SCENARIO]);
    let r_min_sq = config.min_distance_m * config.min_distance_m;
    let r_max_sq = config.coverage_radius_m * config.coverage_radius_m;

    let mut ues = Vec::with_capacity(config.ue_count);
    for m in 0..config.ue_count {
        // Uniform over the annulus area.
        let u: f64 = rng.random();
        let d = (r_min_sq + u * (r_max_sq - r_min_sq)).sqrt();
        let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let position = Position::new(d * theta.cos(), d * theta.sin());
        let los = rng.random::<f64>() < config.los_probability;
        ues.push(UserEquipment {
            id: UeId(m),
            position,
            los,
        });
    }

    let mut apps = Vec::with_capacity(config.ue_count * config.apps_per_ue);
    for ue in 0..config.ue_count {
        for _ in 0..config.apps_per_ue {
            let qos_class = rng.random_range(1..=config.class_count);
            apps.push(UserApp {
                id: UaId(apps.len()),
                ue: UeId(ue),
                qos_class,
            });
        }
    }

    Ok(Scenario {
        coverage_radius_m: config.coverage_radius_m,
        min_distance_m: config.min_distance_m,
        los_probability: config.los_probability,
        ues,
        apps,
        class_count: config.class_count,
        load_bits: config.load_bits,
        slot_duration_s: config.slot_duration_s,
        seed,
    })
}

/// Delivery state of one app.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UaStatus {
    Pending,
    Satisfied,
    Expired,
}

/// Per-app mutable delivery record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UaState {
    /// Cumulative delivered bits, capped at the load.
    pub transmitted_bits: f64,
    pub muw_bits: f64,
    pub mmw_bits: f64,
    pub status: UaStatus,
}

impl UaState {
    fn fresh() -> Self {
        Self {
            transmitted_bits: 0.0,
            muw_bits: 0.0,
            mmw_bits: 0.0,
            status: UaStatus::Pending,
        }
    }
}

/// The transmission ledger for a whole run: one [`UaState`] per app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    load_bits: f64,
    states: Vec<UaState>,
}

impl Ledger {
    pub fn new(scenario: &Scenario) -> Self {
        let mut ledger = Self {
            load_bits: scenario.load_bits,
            states: vec![UaState::fresh(); scenario.app_count()],
        };
        // Zero-load apps are satisfied before any slot runs.
        if scenario.load_bits == 0.0 {
            for s in &mut ledger.states {
                s.status = UaStatus::Satisfied;
            }
        }
        ledger
    }

    pub fn load_bits(&self) -> f64 {
        self.load_bits
    }

    pub fn state(&self, a: UaId) -> &UaState {
        &self.states[a.0]
    }

    pub fn states(&self) -> &[UaState] {
        &self.states
    }

    pub fn is_pending(&self, a: UaId) -> bool {
        self.states[a.0].status == UaStatus::Pending
    }

    /// Bits still owed to a pending app: `B - B_pi(a, t-1)`.
    pub fn remaining_bits(&self, a: UaId) -> f64 {
        self.load_bits - self.states[a.0].transmitted_bits
    }

    /// Record a delivery, truncating at the remaining need. Returns the bits
    /// actually delivered. Flips the app to satisfied when the load is met.
    ///
    /// Recording onto a satisfied or expired app is a scheduler bug.
    pub fn record_transmission(&mut self, a: UaId, bits: f64, band: Band) -> f64 {
        assert!(bits >= 0.0, "negative delivery");
        let state = &mut self.states[a.0];
        assert_eq!(
            state.status,
            UaStatus::Pending,
            "recording onto a non-pending app {:?}",
            a
        );
        let remaining = self.load_bits - state.transmitted_bits;
        let delivered = if bits >= remaining {
            state.transmitted_bits = self.load_bits;
            state.status = UaStatus::Satisfied;
            remaining
        } else {
            state.transmitted_bits += bits;
            bits
        };
        match band {
            Band::MicroWave => state.muw_bits += delivered,
            Band::MmWave => state.mmw_bits += delivered,
        }
        delivered
    }

    /// Expire all still-pending apps of delay class `t`; call after slot `t`
    /// has completed. Expired apps never rejoin scheduling.
    pub fn expire_class(&mut self, scenario: &Scenario, t: usize) {
        for app in scenario.class_members(t) {
            let state = &mut self.states[app.id.0];
            if state.status == UaStatus::Pending {
                state.status = UaStatus::Expired;
            }
        }
    }

    /// Average delivered rate after slot `t`: `B_pi(a, t) / (t * tau2)`.
    pub fn average_rate(&self, a: UaId, t: usize, slot_duration_s: f64) -> f64 {
        assert!(t >= 1, "average rate is defined from slot 1 on");
        self.states[a.0].transmitted_bits / (t as f64 * slot_duration_s)
    }

    /// QoS violation indicator for an app whose deadline slot has completed:
    /// 0 when the average rate met `B / (t * tau2)` (equivalently the full
    /// load arrived in time), 1 otherwise.
    pub fn qos_indicator(&self, scenario: &Scenario, a: UaId, completed_slot: usize) -> u8 {
        let deadline = scenario.app(a).qos_class;
        assert!(
            completed_slot >= deadline,
            "querying the QoS indicator before the deadline of {:?}",
            a
        );
        if self.states[a.0].transmitted_bits >= self.load_bits {
            0
        } else {
            1
        }
    }

    pub fn total_transmitted(&self) -> f64 {
        self.states.iter().map(|s| s.transmitted_bits).sum()
    }
}
