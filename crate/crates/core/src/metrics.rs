//! Evaluation metrics: QoS-violation rate, its empirical CDF, per-band
//! offload, distance cohorts, and matching-effort statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheduler::PolicyTrace;
use crate::traffic::{Scenario, UaId, UaStatus, UeId};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("empty sample set")]
    EmptySamples,
    #[error("cohort size {requested} does not fit {available} UEs disjointly")]
    CohortTooLarge { requested: usize, available: usize },
}

/// Per-slot split of delivered bits between the bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotOffload {
    pub slot: usize,
    pub muw_bits: f64,
    pub mmw_bits: f64,
    /// mmWave fraction of the slot's bits; zero when nothing moved.
    pub mmw_share: f64,
}

/// Everything a single run contributes to the evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Fraction of apps whose deadline-rate requirement was violated.
    pub lambda: f64,
    pub violations: usize,
    pub app_count: usize,
    pub offload: Vec<SlotOffload>,
    pub rounds_per_slot: Vec<usize>,
    pub proposals_per_slot: Vec<usize>,
    pub satisfied: Vec<bool>,
}

/// Fraction of apps that missed their QoS requirement: violations divided
/// by the total app count.
pub fn lambda_metric(scenario: &Scenario, trace: &PolicyTrace) -> f64 {
    let violations = trace
        .final_states
        .iter()
        .filter(|s| s.status != UaStatus::Satisfied)
        .count();
    violations as f64 / scenario.app_count() as f64
}

/// Violation rate restricted to the apps of a UE subset (cell-edge or
/// cell-center cohorts). Returns `None` when the subset owns no apps.
pub fn lambda_for_ues(scenario: &Scenario, trace: &PolicyTrace, ues: &[UeId]) -> Option<f64> {
    let mut total = 0usize;
    let mut violated = 0usize;
    for app in &scenario.apps {
        if ues.contains(&app.ue) {
            total += 1;
            if trace.final_states[app.id.0].status != UaStatus::Satisfied {
                violated += 1;
            }
        }
    }
    (total > 0).then(|| violated as f64 / total as f64)
}

/// Per-slot band totals and mmWave share since the bits left the scheduler.
pub fn offload_report(trace: &PolicyTrace) -> Vec<SlotOffload> {
    trace
        .slots
        .iter()
        .map(|d| {
            let muw_bits = d.muw_bits();
            let mmw_bits = d.mmw_bits();
            let total = muw_bits + mmw_bits;
            SlotOffload {
                slot: d.slot,
                muw_bits,
                mmw_bits,
                mmw_share: if total > 0.0 { mmw_bits / total } else { 0.0 },
            }
        })
        .collect()
}

/// Aggregate one trace into [`RunMetrics`].
pub fn run_metrics(scenario: &Scenario, trace: &PolicyTrace) -> RunMetrics {
    let satisfied: Vec<bool> = trace
        .final_states
        .iter()
        .map(|s| s.status == UaStatus::Satisfied)
        .collect();
    let violations = satisfied.iter().filter(|s| !**s).count();
    RunMetrics {
        lambda: violations as f64 / scenario.app_count() as f64,
        violations,
        app_count: scenario.app_count(),
        offload: offload_report(trace),
        rounds_per_slot: trace.slots.iter().map(|d| d.muw_matching.rounds).collect(),
        proposals_per_slot: trace
            .slots
            .iter()
            .map(|d| d.muw_matching.proposals)
            .collect(),
        satisfied,
    }
}

/// Right-continuous empirical CDF as a `(x, F(x))` step table over the
/// sorted distinct sample values; `F` of the largest sample is 1.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut table: Vec<(f64, f64)> = Vec::new();
    for (i, x) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match table.last_mut() {
            Some(last) if last.0 == *x => last.1 = f,
            _ => table.push((*x, f)),
        }
    }
    Ok(table)
}

/// Evaluate a CDF step table at a point.
pub fn cdf_at(table: &[(f64, f64)], x: f64) -> f64 {
    let mut value = 0.0;
    for &(step_x, f) in table {
        if step_x <= x {
            value = f;
        } else {
            break;
        }
    }
    value
}

/// The `n` farthest (cell-edge) and `n` nearest (cell-center) UEs by
/// distance from the base station, ties broken by UE index. The cohorts
/// must be disjoint, so `2n` may not exceed the UE count.
pub fn cohort_split(scenario: &Scenario, n: usize) -> Result<(Vec<UeId>, Vec<UeId>), MetricsError> {
    let m = scenario.ue_count();
    if n > m || 2 * n > m {
        return Err(MetricsError::CohortTooLarge {
            requested: n,
            available: m,
        });
    }
    let mut by_distance: Vec<(f64, UeId)> = scenario
        .ues
        .iter()
        .map(|ue| (ue.position.distance(), ue.id))
        .collect();
    by_distance.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let center: Vec<UeId> = by_distance[..n].iter().map(|x| x.1).collect();
    let edge: Vec<UeId> = by_distance[m - n..].iter().map(|x| x.1).collect();
    Ok((edge, center))
}

/// Satisfaction flag of one app from a trace (true = QoS met).
pub fn app_satisfied(trace: &PolicyTrace, a: UaId) -> bool {
    trace.final_states[a.0].status == UaStatus::Satisfied
}
