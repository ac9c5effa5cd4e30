//! Discrete-time simulator for a dual-mode small base station that serves
//! per-application traffic jointly on millimeter-wave and microwave
//! downlinks.
//!
//! Apps declare a delay class (how many slots they tolerate); the scheduler
//! pre-serves future-deadline apps opportunistically on the mmWave TDMA band
//! and, at each app's deadline slot, runs a stable one-to-many matching with
//! externalities between the deadline class and the microwave OFDMA resource
//! blocks. A CSI-only baseline that collapses each UE's apps to the most
//! stringent delay is included for comparison, along with a seeded
//! Monte-Carlo experiment harness.

pub mod channel;
pub mod matching;
pub mod metrics;
pub mod rng;
pub mod scheduler;
#[cfg(feature = "harness")]
pub mod sim;
pub mod traffic;

pub use channel::{Band, BandParams, ChannelDraws, Position, RadioParams};
pub use scheduler::{run_policy, PolicyKind, PolicyTrace};
pub use traffic::{generate_scenario, Ledger, Scenario, ScenarioConfig, UaId, UeId};
