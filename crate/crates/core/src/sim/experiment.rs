//! Seeded Monte-Carlo campaigns over scenario points, with deterministic
//! CSV/JSON emission.
//!
//! Replications run on a worker pool; every replication derives its own
//! random streams from (master seed, point index, replication index), and
//! all policies of one replication share the same scenario and channel
//! draws, so policy comparisons are paired. Aggregation walks results in
//! replication order, which makes the emitted files byte-stable for a fixed
//! seed.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, Preset, SweepAxis};
use crate::channel::{BandParams, ChannelDraws, ChannelError};
use crate::metrics::{self, empirical_cdf};
use crate::rng::{derive_seed, stream};
use crate::scheduler::{run_policy_with_draws, PolicyKind};
use crate::traffic::{generate_scenario, ScenarioConfig, TrafficError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Experiment families; each one decides which result files get written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Per-slot band split across a LoS-probability series.
    Offload,
    /// Mean violation rate across a per-app load sweep.
    LambdaVsLoad,
    /// Violation-rate CDFs for cell-edge/center cohorts at one point.
    CdfCohorts,
    /// Matching effort across a network-size sweep.
    IterationsVsUes,
    /// One parameter point, overall outputs.
    SinglePoint,
}

impl ExperimentKind {
    fn of(cfg: &ExperimentConfig) -> Self {
        match cfg.preset {
            Some(Preset::Fig2) => ExperimentKind::Offload,
            Some(Preset::Fig3) => ExperimentKind::LambdaVsLoad,
            Some(Preset::Fig4) | Some(Preset::Fig5) => ExperimentKind::CdfCohorts,
            Some(Preset::Fig6) => ExperimentKind::IterationsVsUes,
            None => match cfg.sweep.as_ref().map(|s| s.axis) {
                Some(SweepAxis::LoadBits) => ExperimentKind::LambdaVsLoad,
                Some(SweepAxis::LosProbability) => ExperimentKind::Offload,
                Some(SweepAxis::UeCount) => ExperimentKind::IterationsVsUes,
                None => ExperimentKind::SinglePoint,
            },
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Offload => "offload",
            ExperimentKind::LambdaVsLoad => "lambda_vs_load",
            ExperimentKind::CdfCohorts => "cdf_cohorts",
            ExperimentKind::IterationsVsUes => "iterations_vs_ues",
            ExperimentKind::SinglePoint => "single_point",
        }
    }
}

#[derive(Debug, Clone)]
struct Point {
    label: String,
    scenario: ScenarioConfig,
}

fn sweep_points(cfg: &ExperimentConfig, kind: ExperimentKind) -> Vec<Point> {
    let base = cfg.scenario.clone();
    match (&cfg.sweep, kind) {
        (Some(sweep), ExperimentKind::IterationsVsUes) => {
            // Network-size sweep; under the fig6 preset the whole grid is
            // additionally run with and without LoS coverage.
            let rho_series: Vec<f64> = if cfg.preset == Some(Preset::Fig6) {
                vec![0.0, 0.9]
            } else {
                vec![base.los_probability]
            };
            let mut points = Vec::new();
            for &rho in &rho_series {
                for &m in &sweep.grid {
                    let mut scenario = base.clone();
                    scenario.ue_count = m as usize;
                    scenario.los_probability = rho;
                    points.push(Point {
                        label: format!("M={},rho={}", m as usize, rho),
                        scenario,
                    });
                }
            }
            points
        }
        (Some(sweep), _) => sweep
            .grid
            .iter()
            .map(|&v| {
                let mut scenario = base.clone();
                let label = match sweep.axis {
                    SweepAxis::LoadBits => {
                        scenario.load_bits = v;
                        format!("B={}", v)
                    }
                    SweepAxis::LosProbability => {
                        scenario.los_probability = v;
                        format!("rho={}", v)
                    }
                    SweepAxis::UeCount => {
                        scenario.ue_count = v as usize;
                        format!("M={}", v as usize)
                    }
                };
                Point { label, scenario }
            })
            .collect(),
        (None, _) => vec![Point {
            label: "base".into(),
            scenario: base,
        }],
    }
}

/// Per-policy results of a single replication.
#[derive(Debug, Clone)]
struct PolicyRep {
    lambda: f64,
    edge_lambda: Option<f64>,
    center_lambda: Option<f64>,
    muw_bits_per_slot: Vec<f64>,
    mmw_bits_per_slot: Vec<f64>,
    rounds_total: usize,
    proposals_total: usize,
}

/// Aggregates of one policy at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyAggregate {
    pub policy: String,
    pub mean_lambda: f64,
    pub std_lambda: f64,
    /// Raw per-replication violation rates, in replication order.
    pub lambda_samples: Vec<f64>,
    pub mean_muw_bits_per_slot: Vec<f64>,
    pub mean_mmw_bits_per_slot: Vec<f64>,
    /// mmWave fraction of all bits moved over the horizon.
    pub cumulative_mmw_share: f64,
    pub mean_rounds_per_slot: f64,
    pub mean_proposals_per_slot: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_lambda_samples: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_lambda_samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub label: String,
    pub scenario: ScenarioConfig,
    pub per_policy: Vec<PolicyAggregate>,
}

/// Campaign output: everything the CSV files are generated from.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub preset: Option<String>,
    pub kind: String,
    pub seed: u64,
    pub replications: usize,
    pub policies: Vec<String>,
    pub points: Vec<PointSummary>,
    pub files: Vec<String>,
}

/// Output controls for [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub dump_traces: bool,
}

fn log_enabled(level: &str) -> bool {
    let setting = std::env::var("SIM_LOG").unwrap_or_else(|_| "info".into());
    match setting.as_str() {
        "off" | "quiet" | "0" => false,
        "debug" => true,
        _ => level == "info",
    }
}

macro_rules! sim_info {
    ($($arg:tt)*) => {
        if log_enabled("info") { eprintln!($($arg)*); }
    };
}

macro_rules! sim_debug {
    ($($arg:tt)*) => {
        if log_enabled("debug") { eprintln!($($arg)*); }
    };
}

/// Run the whole campaign described by `cfg` and write result files into
/// `opts.out_dir`. Deterministic in (config, seed): rerunning produces
/// byte-identical CSV and JSON output.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Summary, SimError> {
    cfg.validate()?;
    let bands = cfg.band_params()?;
    let kind = ExperimentKind::of(cfg);
    let points = sweep_points(cfg, kind);
    let policies = cfg.policies.kinds();

    fs::create_dir_all(&opts.out_dir)?;
    if opts.dump_traces {
        fs::create_dir_all(opts.out_dir.join("traces"))?;
    }
    write_text(
        &opts.out_dir.join("effective_config.json"),
        &serde_json::to_string_pretty(cfg)?,
    )?;

    // Cohort size: the 10 farthest / nearest UEs when they fit disjointly.
    let cohort_n = |m: usize| -> Option<usize> {
        let n = (m / 2).min(10);
        (kind == ExperimentKind::CdfCohorts && n >= 1).then_some(n)
    };

    let mut point_summaries = Vec::with_capacity(points.len());
    for (point_index, point) in points.iter().enumerate() {
        sim_info!(
            "[sim] point {}/{}: {} ({} reps)",
            point_index + 1,
            points.len(),
            point.label,
            cfg.replications
        );
        let cohort = cohort_n(point.scenario.ue_count);
        let reps: Result<Vec<Vec<PolicyRep>>, SimError> = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                eval_replication(
                    cfg,
                    &bands,
                    &point.scenario,
                    &policies,
                    point_index,
                    rep,
                    cohort,
                    opts,
                )
            })
            .collect();
        let reps = reps?;
        let aggregates = aggregate(&policies, &reps, point.scenario.class_count);
        sim_debug!(
            "[sim]   {}",
            aggregates
                .iter()
                .map(|a| format!("{}: lambda={:.4}", a.policy, a.mean_lambda))
                .collect::<Vec<_>>()
                .join(", ")
        );
        point_summaries.push(PointSummary {
            label: point.label.clone(),
            scenario: point.scenario.clone(),
            per_policy: aggregates,
        });
    }

    let mut summary = Summary {
        preset: cfg.preset.map(|p| p.name().to_string()),
        kind: kind.name().to_string(),
        seed: cfg.seed,
        replications: cfg.replications,
        policies: policies.iter().map(|p| p.label().to_string()).collect(),
        points: point_summaries,
        files: Vec::new(),
    };

    write_result_files(&mut summary, kind, &opts.out_dir)?;
    write_text(
        &opts.out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    sim_info!(
        "[sim] wrote {} file(s) to {}",
        summary.files.len() + 1,
        opts.out_dir.display()
    );
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
fn eval_replication(
    cfg: &ExperimentConfig,
    bands: &BandParams,
    scenario_cfg: &ScenarioConfig,
    policies: &[PolicyKind],
    point_index: usize,
    rep: usize,
    cohort: Option<usize>,
    opts: &RunOptions,
) -> Result<Vec<PolicyRep>, SimError> {
    let rep_seed = derive_seed(
        cfg.seed,
        &[stream::REPLICATION, point_index as u64, rep as u64],
    );
    let scenario = generate_scenario(scenario_cfg, derive_seed(rep_seed, &[1]))?;
    let positions: Vec<_> = scenario.ues.iter().map(|ue| ue.position).collect();
    let draws = ChannelDraws::new(
        &positions,
        bands,
        scenario.class_count,
        derive_seed(rep_seed, &[2]),
    )?;
    if opts.dump_traces {
        let path = opts
            .out_dir
            .join("traces")
            .join(format!("point{}_rep{}_scenario.json", point_index, rep));
        write_text(&path, &serde_json::to_string(&scenario)?)?;
    }

    let cohorts = cohort.map(|n| metrics::cohort_split(&scenario, n).expect("cohort size checked"));

    let mut out = Vec::with_capacity(policies.len());
    for &policy in policies {
        let trace = run_policy_with_draws(&scenario, bands, policy, &draws);
        let offload = metrics::offload_report(&trace);
        let (edge_lambda, center_lambda) = match &cohorts {
            Some((edge, center)) => (
                metrics::lambda_for_ues(&scenario, &trace, edge),
                metrics::lambda_for_ues(&scenario, &trace, center),
            ),
            None => (None, None),
        };
        if opts.dump_traces {
            let stem = format!("point{}_rep{}_{}", point_index, rep, policy.label());
            let dir = opts.out_dir.join("traces");
            write_text(
                &dir.join(format!("{stem}.json")),
                &serde_json::to_string(&trace)?,
            )?;
            write_text(&dir.join(format!("{stem}.csv")), &trace.to_csv())?;
        }
        out.push(PolicyRep {
            lambda: metrics::lambda_metric(&scenario, &trace),
            edge_lambda,
            center_lambda,
            muw_bits_per_slot: offload.iter().map(|s| s.muw_bits).collect(),
            mmw_bits_per_slot: offload.iter().map(|s| s.mmw_bits).collect(),
            rounds_total: trace.slots.iter().map(|d| d.muw_matching.rounds).sum(),
            proposals_total: trace.slots.iter().map(|d| d.muw_matching.proposals).sum(),
        });
    }
    Ok(out)
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    xs.sum::<f64>() / n as f64 + 0.0
}

fn aggregate(
    policies: &[PolicyKind],
    reps: &[Vec<PolicyRep>],
    horizon: usize,
) -> Vec<PolicyAggregate> {
    let n = reps.len();
    policies
        .iter()
        .enumerate()
        .map(|(pi, policy)| {
            let of = |f: &dyn Fn(&PolicyRep) -> f64| mean(reps.iter().map(|r| f(&r[pi])), n);
            let lambda_samples: Vec<f64> = reps.iter().map(|r| r[pi].lambda).collect();
            let mean_lambda = mean(lambda_samples.iter().copied(), n);
            let var = if n > 1 {
                lambda_samples
                    .iter()
                    .map(|x| (x - mean_lambda).powi(2))
                    .sum::<f64>()
                    / (n as f64 - 1.0)
            } else {
                0.0
            };
            let mean_muw: Vec<f64> = (0..horizon)
                .map(|t| mean(reps.iter().map(|r| r[pi].muw_bits_per_slot[t]), n))
                .collect();
            let mean_mmw: Vec<f64> = (0..horizon)
                .map(|t| mean(reps.iter().map(|r| r[pi].mmw_bits_per_slot[t]), n))
                .collect();
            let total_muw: f64 = mean_muw.iter().sum();
            let total_mmw: f64 = mean_mmw.iter().sum();
            let total = total_muw + total_mmw;
            let cohort_samples = |f: &dyn Fn(&PolicyRep) -> Option<f64>| -> Option<Vec<f64>> {
                let samples: Vec<f64> = reps.iter().filter_map(|r| f(&r[pi])).collect();
                (!samples.is_empty()).then_some(samples)
            };
            PolicyAggregate {
                policy: policy.label().to_string(),
                mean_lambda,
                std_lambda: var.sqrt(),
                lambda_samples,
                mean_muw_bits_per_slot: mean_muw,
                mean_mmw_bits_per_slot: mean_mmw,
                cumulative_mmw_share: if total > 0.0 { total_mmw / total } else { 0.0 },
                mean_rounds_per_slot: of(&|r| r.rounds_total as f64 / horizon as f64),
                mean_proposals_per_slot: of(&|r| r.proposals_total as f64 / horizon as f64),
                edge_lambda_samples: cohort_samples(&|r| r.edge_lambda),
                center_lambda_samples: cohort_samples(&|r| r.center_lambda),
            }
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<(), SimError> {
    fs::write(path, text)?;
    Ok(())
}

fn write_result_files(
    summary: &mut Summary,
    kind: ExperimentKind,
    out_dir: &Path,
) -> Result<(), SimError> {
    let outputs: Vec<(&str, String)> = match kind {
        ExperimentKind::Offload => vec![("offload_per_slot.csv", offload_csv(summary))],
        ExperimentKind::SinglePoint => vec![
            ("offload_per_slot.csv", offload_csv(summary)),
            ("cdf_lambda.csv", cdf_csv(summary)),
        ],
        ExperimentKind::LambdaVsLoad => {
            vec![("lambda_vs_load.csv", lambda_vs_load_csv(summary))]
        }
        ExperimentKind::CdfCohorts => vec![("cdf_lambda.csv", cdf_csv(summary))],
        ExperimentKind::IterationsVsUes => {
            vec![("iterations_vs_M.csv", iterations_csv(summary))]
        }
    };
    for (name, content) in outputs {
        write_text(&out_dir.join(name), &content)?;
        summary.files.push(name.to_string());
    }
    Ok(())
}

fn offload_csv(summary: &Summary) -> String {
    let mut out =
        String::from("los_probability,policy,slot,mean_muw_bits,mean_mmw_bits,mmw_share\n");
    for point in &summary.points {
        for agg in &point.per_policy {
            for (i, (muw, mmw)) in agg
                .mean_muw_bits_per_slot
                .iter()
                .zip(&agg.mean_mmw_bits_per_slot)
                .enumerate()
            {
                let total = muw + mmw;
                let share = if total > 0.0 { mmw / total } else { 0.0 };
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    point.scenario.los_probability,
                    agg.policy,
                    i + 1,
                    muw,
                    mmw,
                    share
                ));
            }
        }
    }
    out
}

fn lambda_vs_load_csv(summary: &Summary) -> String {
    let mut out = String::from("load_bits,policy,mean_lambda,std_lambda,replications\n");
    for point in &summary.points {
        for agg in &point.per_policy {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                point.scenario.load_bits,
                agg.policy,
                agg.mean_lambda,
                agg.std_lambda,
                summary.replications
            ));
        }
    }
    out
}

fn iterations_csv(summary: &Summary) -> String {
    let mut out =
        String::from("ue_count,los_probability,policy,mean_rounds,mean_proposals,replications\n");
    for point in &summary.points {
        for agg in &point.per_policy {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                point.scenario.ue_count,
                point.scenario.los_probability,
                agg.policy,
                agg.mean_rounds_per_slot,
                agg.mean_proposals_per_slot,
                summary.replications
            ));
        }
    }
    out
}

// CDF table: the raw sorted samples (kind = sample) plus a fixed 0..1 grid
// (kind = grid) so plots are reproducible without recomputation.
fn cdf_csv(summary: &Summary) -> String {
    let mut out = String::from("series,kind,lambda,f\n");
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    for point in &summary.points {
        let prefix = if summary.points.len() > 1 {
            format!("{}:", point.label)
        } else {
            String::new()
        };
        for agg in &point.per_policy {
            let mut series: Vec<(String, &Vec<f64>)> =
                vec![(format!("{}{}-all", prefix, agg.policy), &agg.lambda_samples)];
            if let Some(edge) = &agg.edge_lambda_samples {
                series.push((format!("{}{}-edge", prefix, agg.policy), edge));
            }
            if let Some(center) = &agg.center_lambda_samples {
                series.push((format!("{}{}-center", prefix, agg.policy), center));
            }
            for (name, samples) in series {
                let table = empirical_cdf(samples).expect("nonempty replication set");
                for (x, f) in &table {
                    out.push_str(&format!("{},sample,{},{}\n", name, x, f));
                }
                for &g in &grid {
                    out.push_str(&format!(
                        "{},grid,{},{}\n",
                        name,
                        g,
                        metrics::cdf_at(&table, g)
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{Preset, SweepSpec};

    #[test]
    fn kind_follows_preset_then_sweep_axis() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(ExperimentKind::of(&cfg), ExperimentKind::SinglePoint);
        cfg.sweep = Some(SweepSpec {
            axis: SweepAxis::LoadBits,
            grid: vec![1e5],
        });
        assert_eq!(ExperimentKind::of(&cfg), ExperimentKind::LambdaVsLoad);
        Preset::Fig2.apply(&mut cfg);
        assert_eq!(ExperimentKind::of(&cfg), ExperimentKind::Offload);
        Preset::Fig6.apply(&mut cfg);
        assert_eq!(ExperimentKind::of(&cfg), ExperimentKind::IterationsVsUes);
    }

    #[test]
    fn fig2_points_cover_both_los_series() {
        let mut cfg = ExperimentConfig::default();
        Preset::Fig2.apply(&mut cfg);
        let points = sweep_points(&cfg, ExperimentKind::of(&cfg));
        let rhos: Vec<f64> = points.iter().map(|p| p.scenario.los_probability).collect();
        assert_eq!(rhos, vec![0.1, 0.5]);
    }

    #[test]
    fn fig6_points_are_the_m_grid_times_rho_series() {
        let mut cfg = ExperimentConfig::default();
        Preset::Fig6.apply(&mut cfg);
        let points = sweep_points(&cfg, ExperimentKind::of(&cfg));
        assert_eq!(points.len(), 10);
        assert!(points.iter().any(|p| p.label == "M=25,rho=0.9"));
        for p in &points {
            assert!([0.0, 0.9].contains(&p.scenario.los_probability));
        }
    }
}
