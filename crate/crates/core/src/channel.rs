//! Propagation and achievable-rate model for both frequency bands.
//!
//! Large-scale loss follows the log-distance model with a per-run Gaussian
//! shadowing term; small-scale fading is Rayleigh, i.e. the squared channel
//! magnitude is exponential with unit mean, drawn independently per resource
//! block and per slot. The millimeter-wave band is TDMA over `K1` RBs handed
//! to one app at a time; the microwave band is OFDMA over `K2` RBs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, stream_rng};

/// Below this distance the log-distance fit is extrapolating past its
/// intercept reference (the intercept is the loss at exactly 1 m).
pub const MODEL_MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("distance {0} m is below the {MODEL_MIN_DISTANCE_M} m path-loss model minimum")]
    DistanceBelowMinimum(f64),
    #[error("invalid radio parameters: {0}")]
    InvalidParams(String),
}

/// Frequency band identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    MmWave,
    MicroWave,
}

/// Per-band radio configuration.
///
/// `rb_count` is always `floor(total_bandwidth / rb_bandwidth)` and transmit
/// power is split uniformly across RBs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub band: Band,
    /// Total transmit power in watts.
    pub tx_power_w: f64,
    /// Total band bandwidth in Hz.
    pub total_bandwidth_hz: f64,
    /// Bandwidth of one resource block in Hz.
    pub rb_bandwidth_hz: f64,
    /// Number of resource blocks, `floor(total / rb)`.
    pub rb_count: usize,
    /// Path-loss slope (dimensionless exponent of the log-distance fit).
    pub pathloss_exponent: f64,
    /// Path loss at 1 m, in dB.
    pub pathloss_intercept_db: f64,
    /// Standard deviation of the shadowing term, in dB.
    pub shadowing_std_db: f64,
    /// Antenna gain as a linear factor (1.0 = isotropic).
    pub antenna_gain: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_density_w_per_hz: f64,
}

fn finite_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl RadioParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        band: Band,
        tx_power_w: f64,
        total_bandwidth_hz: f64,
        rb_bandwidth_hz: f64,
        pathloss_exponent: f64,
        pathloss_intercept_db: f64,
        shadowing_std_db: f64,
        antenna_gain: f64,
        noise_density_w_per_hz: f64,
    ) -> Result<Self, ChannelError> {
        if !finite_positive(tx_power_w) {
            return Err(ChannelError::InvalidParams("tx_power_w must be > 0".into()));
        }
        if !finite_positive(total_bandwidth_hz) || !finite_positive(rb_bandwidth_hz) {
            return Err(ChannelError::InvalidParams("bandwidths must be > 0".into()));
        }
        if !finite_positive(antenna_gain) {
            return Err(ChannelError::InvalidParams(
                "antenna_gain must be > 0".into(),
            ));
        }
        if !finite_positive(noise_density_w_per_hz) {
            return Err(ChannelError::InvalidParams(
                "noise density must be > 0".into(),
            ));
        }
        if shadowing_std_db < 0.0 {
            return Err(ChannelError::InvalidParams(
                "shadowing stddev must be >= 0".into(),
            ));
        }
        let rb_count = (total_bandwidth_hz / rb_bandwidth_hz).floor() as usize;
        if rb_count < 1 {
            return Err(ChannelError::InvalidParams(
                "total bandwidth must fit at least one RB".into(),
            ));
        }
        Ok(Self {
            band,
            tx_power_w,
            total_bandwidth_hz,
            rb_bandwidth_hz,
            rb_count,
            pathloss_exponent,
            pathloss_intercept_db,
            shadowing_std_db,
            antenna_gain,
            noise_density_w_per_hz,
        })
    }

    /// Uniform per-RB transmit power, `P / K`.
    pub fn per_rb_power_w(&self) -> f64 {
        self.tx_power_w / self.rb_count as f64
    }

    /// Noise power over one RB, `N0 * w`.
    pub fn rb_noise_power_w(&self) -> f64 {
        self.noise_density_w_per_hz * self.rb_bandwidth_hz
    }

    /// mmWave defaults: 1 W over 1 GHz in 480 kHz RBs, slope 2, 70 dB
    /// intercept, 5.2 dB shadowing, 18 dB antenna gain.
    pub fn mmw_default() -> Self {
        Self::new(
            Band::MmWave,
            1.0,
            1e9,
            480e3,
            2.0,
            70.0,
            5.2,
            10f64.powf(18.0 / 10.0),
            dbm_per_hz_to_watts_per_hz(-174.0),
        )
        .expect("default mmWave parameters are valid")
    }

    /// Microwave defaults: 1 W over 10 MHz in 480 kHz RBs, slope 3, 38 dB
    /// intercept, 10 dB shadowing, isotropic antenna.
    pub fn muw_default() -> Self {
        Self::new(
            Band::MicroWave,
            1.0,
            10e6,
            480e3,
            3.0,
            38.0,
            10.0,
            1.0,
            dbm_per_hz_to_watts_per_hz(-174.0),
        )
        .expect("default microwave parameters are valid")
    }
}

/// The mmWave/microwave parameter pair used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandParams {
    pub mmw: RadioParams,
    pub muw: RadioParams,
}

impl Default for BandParams {
    fn default() -> Self {
        Self {
            mmw: RadioParams::mmw_default(),
            muw: RadioParams::muw_default(),
        }
    }
}

/// Planar position relative to the base station at the origin, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x1: f64,
    pub x2: f64,
}

impl Position {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn distance(&self) -> f64 {
        self.x1.hypot(self.x2)
    }
}

/// Convert a density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watts_per_hz(dbm_per_hz: f64) -> f64 {
    10f64.powf((dbm_per_hz - 30.0) / 10.0)
}

/// Log-distance path loss in dB: `beta + alpha * 10 * log10(d) + chi`.
///
/// `shadowing_db` is the pre-drawn per-(UE, band) deviation term. Fails for
/// distances below the 1 m model reference (the log term would extrapolate
/// below the intercept).
pub fn path_loss_db(
    params: &RadioParams,
    pos: Position,
    shadowing_db: f64,
) -> Result<f64, ChannelError> {
    let d = pos.distance();
    if !d.is_finite() || d < MODEL_MIN_DISTANCE_M {
        return Err(ChannelError::DistanceBelowMinimum(d));
    }
    Ok(params.pathloss_intercept_db + params.pathloss_exponent * 10.0 * d.log10() + shadowing_db)
}

/// Achievable rate on one microwave RB in bits/second.
///
/// `fading` is the squared channel magnitude `|g|^2`.
pub fn muw_rb_rate(params: &RadioParams, pathloss_db: f64, fading: f64) -> f64 {
    debug_assert_eq!(params.band, Band::MicroWave);
    debug_assert!(fading >= 0.0);
    let snr = params.per_rb_power_w() * fading * 10f64.powf(-pathloss_db / 10.0)
        / params.rb_noise_power_w();
    params.rb_bandwidth_hz * (1.0 + snr).log2()
}

/// Total achievable rate of one mmWave time slot in bits/second, summed over
/// all `K1` RBs. The antenna gain multiplies the SNR of every RB.
///
/// Panics if the fading vector length differs from the RB count.
pub fn mmw_slot_rate(params: &RadioParams, pathloss_db: f64, fadings: &[f64]) -> f64 {
    debug_assert_eq!(params.band, Band::MmWave);
    assert_eq!(
        fadings.len(),
        params.rb_count,
        "fading vector length must equal the RB count"
    );
    let attenuation = 10f64.powf(-pathloss_db / 10.0);
    let gain_power = params.per_rb_power_w() * params.antenna_gain * attenuation;
    let noise = params.rb_noise_power_w();
    fadings
        .iter()
        .map(|&h2| {
            debug_assert!(h2 >= 0.0);
            params.rb_bandwidth_hz * (1.0 + gain_power * h2 / noise).log2()
        })
        .sum()
}

/// All channel randomness of one run, fixed up front so that every policy
/// evaluated under the same seed sees the same channel.
///
/// Shadowing is drawn once per (UE, band) and held for the whole run.
/// Microwave fading is drawn eagerly for every (slot, UE, RB). mmWave fading
/// is deterministic in (UE, slot, mmW sub-slot) via a derived stream, so a
/// draw does not depend on which apps any policy chose to schedule first.
#[derive(Debug, Clone)]
pub struct ChannelDraws {
    seed: u64,
    /// Per-UE microwave path loss in dB, shadowing included.
    pub muw_loss_db: Vec<f64>,
    /// Per-UE mmWave path loss in dB, shadowing included.
    pub mmw_loss_db: Vec<f64>,
    // [slot - 1][ue][rb]
    muw_fading: Vec<Vec<Vec<f64>>>,
}

impl ChannelDraws {
    /// Draw shadowing and all microwave fading for `horizon` slots.
    pub fn new(
        positions: &[Position],
        bands: &BandParams,
        horizon: usize,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        let ue_count = positions.len();
        let mut shadow_rng = stream_rng(seed, &[stream::SHADOWING]);
        let mut mmw_loss_db = Vec::with_capacity(ue_count);
        let mut muw_loss_db = Vec::with_capacity(ue_count);
        for &pos in positions {
            let chi_mmw: f64 =
                <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut shadow_rng)
                    * bands.mmw.shadowing_std_db;
            let chi_muw: f64 =
                <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut shadow_rng)
                    * bands.muw.shadowing_std_db;
            mmw_loss_db.push(path_loss_db(&bands.mmw, pos, chi_mmw)?);
            muw_loss_db.push(path_loss_db(&bands.muw, pos, chi_muw)?);
        }

        let k2 = bands.muw.rb_count;
        let mut fading_rng = stream_rng(seed, &[stream::MUW_FADING]);
        let muw_fading = (0..horizon)
            .map(|_| {
                (0..ue_count)
                    .map(|_| (0..k2).map(|_| exp_unit_mean(&mut fading_rng)).collect())
                    .collect()
            })
            .collect();

        Ok(Self {
            seed,
            muw_loss_db,
            mmw_loss_db,
            muw_fading,
        })
    }

    /// Squared microwave channel magnitude for (UE, slot, RB). Slots are 1-based.
    pub fn muw_fading(&self, ue: usize, slot: usize, rb: usize) -> f64 {
        self.muw_fading[slot - 1][ue][rb]
    }

    /// Microwave rate for every app of the given UE on `rb` at `slot`.
    pub fn muw_rate(&self, bands: &BandParams, ue: usize, slot: usize, rb: usize) -> f64 {
        muw_rb_rate(
            &bands.muw,
            self.muw_loss_db[ue],
            self.muw_fading(ue, slot, rb),
        )
    }

    /// mmWave slot rate for the given UE at mmWave sub-slot `j` of `slot`.
    ///
    /// Fading is freshly derived from (seed, UE, slot, j); the value is the
    /// same no matter when or whether other draws happened.
    pub fn mmw_slot_rate(&self, bands: &BandParams, ue: usize, slot: usize, j: usize) -> f64 {
        let mut rng: ChaCha8Rng = stream_rng(
            self.seed,
            &[stream::MMW_FADING, ue as u64, slot as u64, j as u64],
        );
        let k1 = bands.mmw.rb_count;
        let fadings: Vec<f64> = (0..k1).map(|_| exp_unit_mean(&mut rng)).collect();
        mmw_slot_rate(&bands.mmw, self.mmw_loss_db[ue], &fadings)
    }
}

// Exponential(1) via inverse transform; |h|^2 for Rayleigh amplitude.
fn exp_unit_mean<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln()
}
