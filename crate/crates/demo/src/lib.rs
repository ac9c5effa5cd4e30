//! Browser bindings for the dual-band scheduler: three interactive
//! operations behind `wasm_bindgen`, each returning a JSON string for the
//! page script to plot.
//!
//! Everything is seeded and synchronous; the page passes plain numbers in
//! and draws the parsed JSON on canvases.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dualband_sim::channel::BandParams;
use dualband_sim::metrics;
use dualband_sim::rng::derive_seed;
use dualband_sim::scheduler::{run_policy_with_draws, PolicyKind};
use dualband_sim::traffic::{generate_scenario, Scenario, ScenarioConfig, UaStatus};
use dualband_sim::ChannelDraws;

fn scenario_config(
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    load_mbits: f64,
    los_probability: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        ue_count: ue_count as usize,
        apps_per_ue: apps_per_ue as usize,
        class_count: class_count as usize,
        load_bits: load_mbits * 1e6,
        los_probability,
        ..Default::default()
    }
}

fn build_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario, String> {
    generate_scenario(cfg, derive_seed(seed, &[1])).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LayoutUe {
    x: f64,
    y: f64,
    los: bool,
    classes: Vec<usize>,
}

#[derive(Serialize)]
struct Layout {
    radius: f64,
    min_distance: f64,
    ues: Vec<LayoutUe>,
}

/// Generate a scenario and return its geometry: UE positions, LoS flags,
/// and the delay classes of each UE's apps.
#[wasm_bindgen]
pub fn scenario_layout(
    seed: u64,
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    los_probability: f64,
) -> Result<String, JsError> {
    scenario_layout_impl(seed, ue_count, apps_per_ue, class_count, los_probability)
        .map_err(|e| JsError::new(&e))
}

fn scenario_layout_impl(
    seed: u64,
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    los_probability: f64,
) -> Result<String, String> {
    let cfg = scenario_config(ue_count, apps_per_ue, class_count, 0.1, los_probability);
    let scenario = build_scenario(&cfg, seed)?;
    let ues = scenario
        .ues
        .iter()
        .map(|ue| LayoutUe {
            x: ue.position.x1,
            y: ue.position.x2,
            los: ue.los,
            classes: scenario
                .apps
                .iter()
                .filter(|a| a.ue == ue.id)
                .map(|a| a.qos_class)
                .collect(),
        })
        .collect();
    let layout = Layout {
        radius: scenario.coverage_radius_m,
        min_distance: scenario.min_distance_m,
        ues,
    };
    Ok(serde_json::to_string(&layout).unwrap())
}

#[derive(Serialize)]
struct PolicyRun {
    policy: String,
    lambda: f64,
    muw_bits: Vec<f64>,
    mmw_bits: Vec<f64>,
    rounds: Vec<usize>,
    /// Per-UE count of satisfied apps, for the map overlay.
    satisfied_per_ue: Vec<usize>,
}

#[derive(Serialize)]
struct RunOutcome {
    horizon: usize,
    apps_per_ue: usize,
    per_policy: Vec<PolicyRun>,
}

/// One paired run of both policies on the same scenario and channel draws.
/// Returns per-slot band bits, matching rounds, the violation rate, and
/// per-UE satisfaction counts.
#[wasm_bindgen]
pub fn run_once(
    seed: u64,
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    load_mbits: f64,
    los_probability: f64,
) -> Result<String, JsError> {
    run_once_impl(
        seed,
        ue_count,
        apps_per_ue,
        class_count,
        load_mbits,
        los_probability,
    )
    .map_err(|e| JsError::new(&e))
}

fn run_once_impl(
    seed: u64,
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    load_mbits: f64,
    los_probability: f64,
) -> Result<String, String> {
    let cfg = scenario_config(
        ue_count,
        apps_per_ue,
        class_count,
        load_mbits,
        los_probability,
    );
    let scenario = build_scenario(&cfg, seed)?;
    let bands = BandParams::default();
    let positions: Vec<_> = scenario.ues.iter().map(|ue| ue.position).collect();
    let draws = ChannelDraws::new(
        &positions,
        &bands,
        scenario.class_count,
        derive_seed(seed, &[2]),
    )
    .map_err(|e| e.to_string())?;

    let per_policy = [PolicyKind::ContextAware, PolicyKind::CsiBaseline]
        .into_iter()
        .map(|policy| {
            let trace = run_policy_with_draws(&scenario, &bands, policy, &draws);
            let offload = metrics::offload_report(&trace);
            let mut satisfied_per_ue = vec![0usize; scenario.ue_count()];
            for app in &scenario.apps {
                if trace.final_states[app.id.0].status == UaStatus::Satisfied {
                    satisfied_per_ue[app.ue.0] += 1;
                }
            }
            PolicyRun {
                policy: policy.label().to_string(),
                lambda: metrics::lambda_metric(&scenario, &trace),
                muw_bits: offload.iter().map(|s| s.muw_bits).collect(),
                mmw_bits: offload.iter().map(|s| s.mmw_bits).collect(),
                rounds: trace.slots.iter().map(|d| d.muw_matching.rounds).collect(),
                satisfied_per_ue,
            }
        })
        .collect();

    let out = RunOutcome {
        horizon: scenario.class_count,
        apps_per_ue: cfg.apps_per_ue,
        per_policy,
    };
    Ok(serde_json::to_string(&out).unwrap())
}

#[derive(Serialize)]
struct SweepOutcome {
    loads_mbit: Vec<f64>,
    context: Vec<f64>,
    csi: Vec<f64>,
}

/// Sweep the per-app load and return mean violation rates for both
/// policies, paired over `reps` seeded replications per point.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep_load(
    seed: u64,
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    los_probability: f64,
    min_load_mbits: f64,
    max_load_mbits: f64,
    points: u32,
    reps: u32,
) -> Result<String, JsError> {
    sweep_load_impl(
        seed,
        ue_count,
        apps_per_ue,
        class_count,
        los_probability,
        min_load_mbits,
        max_load_mbits,
        points,
        reps,
    )
    .map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
fn sweep_load_impl(
    seed: u64,
    ue_count: u32,
    apps_per_ue: u32,
    class_count: u32,
    los_probability: f64,
    min_load_mbits: f64,
    max_load_mbits: f64,
    points: u32,
    reps: u32,
) -> Result<String, String> {
    if points < 2 || min_load_mbits < 0.0 || max_load_mbits <= min_load_mbits {
        return Err("need points >= 2 and 0 <= min load < max load".into());
    }
    let reps = reps.clamp(1, 200);
    let bands = BandParams::default();
    let mut loads_mbit = Vec::new();
    let mut context = Vec::new();
    let mut csi = Vec::new();

    for p in 0..points {
        let load =
            min_load_mbits + (max_load_mbits - min_load_mbits) * p as f64 / (points - 1) as f64;
        let cfg = scenario_config(ue_count, apps_per_ue, class_count, load, los_probability);
        let mut sums = [0.0f64; 2];
        for rep in 0..reps {
            let rep_seed = derive_seed(seed, &[p as u64, rep as u64]);
            let scenario = build_scenario(&cfg, rep_seed)?;
            let positions: Vec<_> = scenario.ues.iter().map(|ue| ue.position).collect();
            let draws = ChannelDraws::new(
                &positions,
                &bands,
                scenario.class_count,
                derive_seed(rep_seed, &[2]),
            )
            .map_err(|e| e.to_string())?;
            for (i, policy) in [PolicyKind::ContextAware, PolicyKind::CsiBaseline]
                .into_iter()
                .enumerate()
            {
                let trace = run_policy_with_draws(&scenario, &bands, policy, &draws);
                sums[i] += metrics::lambda_metric(&scenario, &trace);
            }
        }
        loads_mbit.push(load);
        context.push(sums[0] / reps as f64);
        csi.push(sums[1] / reps as f64);
    }
    Ok(serde_json::to_string(&SweepOutcome {
        loads_mbit,
        context,
        csi,
    })
    .unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_has_all_ues_inside_radius() {
        let json = scenario_layout_impl(7, 12, 3, 5, 0.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let ues = v["ues"].as_array().unwrap();
        assert_eq!(ues.len(), 12);
        let r = v["radius"].as_f64().unwrap();
        for ue in ues {
            let (x, y) = (ue["x"].as_f64().unwrap(), ue["y"].as_f64().unwrap());
            assert!((x * x + y * y).sqrt() <= r + 1e-9);
            assert_eq!(ue["classes"].as_array().unwrap().len(), 3);
        }
    }

    #[test]
    fn run_once_reports_both_policies() {
        let json = run_once_impl(3, 8, 3, 4, 0.2, 0.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let policies = v["per_policy"].as_array().unwrap();
        assert_eq!(policies.len(), 2);
        for p in policies {
            assert_eq!(p["muw_bits"].as_array().unwrap().len(), 4);
            let lambda = p["lambda"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&lambda));
        }
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let a = sweep_load_impl(11, 6, 3, 4, 0.3, 0.05, 0.4, 4, 5).unwrap();
        let b = sweep_load_impl(11, 6, 3, 4, 0.3, 0.05, 0.4, 4, 5).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["loads_mbit"].as_array().unwrap().len(), 4);
        assert!(sweep_load_impl(1, 6, 3, 4, 0.3, 0.4, 0.1, 4, 5).is_err());
    }
}
