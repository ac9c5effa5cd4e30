//! Experiment CLI.
//!
//! ```text
//! simulate [--config cfg.json] [--preset fig2..fig6] [--seed S] [--reps R]
//!          [--policy context|csi|both] [--dump-traces] [--out DIR]
//! ```
//!
//! Flags override the preset, which overrides the config file. Set
//! `SIM_LOG=off|info|debug` to control progress output.

use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;

use dualband_sim::sim::{run_experiment, ExperimentConfig, PolicyChoice, Preset, RunOptions};

#[derive(Debug, Parser)]
#[command(name = "simulate", about = "Seeded dual-band scheduling experiments")]
struct Args {
    /// JSON experiment config; missing keys use the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Named experiment family (fig2..fig6); overrides scenario/sweep knobs.
    #[arg(long)]
    preset: Option<String>,

    /// Master seed for scenario and channel randomness.
    #[arg(long)]
    seed: Option<u64>,

    /// Monte-Carlo replications per parameter point.
    #[arg(long)]
    reps: Option<usize>,

    /// Policies to evaluate: context, csi, or both.
    #[arg(long)]
    policy: Option<String>,

    /// Also write every policy trace as JSON and CSV under <out>/traces/.
    #[arg(long)]
    dump_traces: bool,

    /// Output directory for result files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();

    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(preset) = &args.preset {
        let preset: Preset = preset.parse()?;
        preset.apply(&mut cfg);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.replications = reps;
    }
    if let Some(policy) = &args.policy {
        cfg.policies = policy.parse::<PolicyChoice>()?;
    }
    cfg.validate().context("invalid experiment config")?;

    let opts = RunOptions {
        out_dir: args.out.clone(),
        dump_traces: args.dump_traces,
    };
    let summary = run_experiment(&cfg, &opts).context("experiment failed")?;

    println!(
        "{} point(s) x {} replication(s), seed {} -> {}",
        summary.points.len(),
        summary.replications,
        summary.seed,
        args.out.display()
    );
    for point in &summary.points {
        for agg in &point.per_policy {
            println!(
                "  {} [{}]: lambda = {:.4} (mmw share {:.3}, {:.1} rounds/slot)",
                point.label,
                agg.policy,
                agg.mean_lambda,
                agg.cumulative_mmw_share,
                agg.mean_rounds_per_slot
            );
        }
    }
    Ok(())
}
