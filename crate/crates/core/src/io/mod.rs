//! Files written and read by the command line tool.

pub mod config;
pub mod csv;
pub mod pgm;
pub mod snapshot;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::metrics::{weight_summary, HISTOGRAM_BINS};
use crate::experiments::{reward_rate, Aggregate, DriftRecord, Rule, TrialOutput};
use crate::network::effective_weights;

pub use config::{Overrides, ResolvedRun, RunConfig, ScenarioEntry};
pub use csv::{format_number, write_csv};
pub use pgm::{encode_pgm, write_pgm};

/// End-of-run digest of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub rule: Rule,
    pub seed: u64,
    pub duration_s: f64,
    pub config_hash: String,
    pub rewards_total: usize,
    pub rewards_per_hour: Vec<u32>,
    pub mean_rewarded: f64,
    pub mean_nonrewarded: f64,
    pub max_nonrewarded: f64,
    pub frac_nonrewarded_gt_0_1: f64,
    pub cumulative_rewarded: f64,
    pub nonrewarded_lt_nonzero: usize,
    /// Rewarded pairs (1-based) with their final long-term weight.
    pub rewarded_long_term: Vec<(usize, usize, f64)>,
}

pub fn summarize(out: &TrialOutput) -> Result<TrialSummary> {
    let sim = &out.simulation;
    let rewarded = sim.config.all_rewarded();
    let w = weight_summary(&sim.weights, &rewarded);
    let duration = sim.time();
    Ok(TrialSummary {
        rule: sim.config.rule,
        seed: sim.config.seed,
        duration_s: duration,
        config_hash: snapshot::config_hash(&sim.config)?,
        rewards_total: sim.rewards.len(),
        rewards_per_hour: reward_rate(&out.reward_times(), 3600.0, duration),
        mean_rewarded: w.mean_rewarded,
        mean_nonrewarded: w.mean_nonrewarded,
        max_nonrewarded: w.max_nonrewarded,
        frac_nonrewarded_gt_0_1: w.frac_nonrewarded_potentiated,
        cumulative_rewarded: w.cumulative_rewarded,
        nonrewarded_lt_nonzero: w.nonrewarded_lt_nonzero,
        rewarded_long_term: rewarded
            .iter()
            .map(|p| (p.stimulus + 1, p.action + 1, sim.weights.lt.get(p.stimulus, p.action)))
            .collect(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn histogram_header() -> Vec<String> {
    let mut h = vec!["time_s".to_string()];
    for part in ["st", "lt", "total"] {
        h.extend((0..HISTOGRAM_BINS).map(|k| format!("{part}_bin{k:02}")));
    }
    h
}

/// Writes the series, histograms, reward log, weight images, summary and
/// final snapshot of one trial into `dir`.
pub fn write_trial(dir: &Path, out: &TrialOutput) -> Result<TrialSummary> {
    create_dir(dir)?;
    let series = &out.series;
    write_csv(&dir.join("metrics.csv"), &series.columns(), &series.rows())?;

    let hist_rows: Vec<Vec<f64>> = series
        .histograms
        .iter()
        .map(|h| {
            let mut row = vec![h.time];
            for part in [&h.short_term, &h.long_term, &h.total] {
                row.extend(part.counts.iter().map(|&c| f64::from(c)));
            }
            row
        })
        .collect();
    write_csv(&dir.join("histograms.csv"), &histogram_header(), &hist_rows)?;

    let reward_rows: Vec<Vec<f64>> = out
        .simulation
        .rewards
        .iter()
        .map(|r| {
            vec![
                r.delivered_at,
                r.earned_at,
                r.amplitude,
                (r.pair.stimulus + 1) as f64,
                (r.pair.action + 1) as f64,
            ]
        })
        .collect();
    write_csv(
        &dir.join("rewards.csv"),
        &["delivered_s", "earned_s", "amplitude", "stimulus", "action"],
        &reward_rows,
    )?;

    let w = &out.simulation.weights;
    write_pgm(&dir.join("weights_total.pgm"), &effective_weights(w)?, 0.0, 1.0)?;
    write_pgm(&dir.join("weights_lt.pgm"), &w.lt, 0.0, 1.0)?;
    write_pgm(&dir.join("weights_st.pgm"), &w.st, -1.0, 1.0)?;

    let summary = summarize(out)?;
    write_json(&dir.join("summary.json"), &summary)?;
    snapshot::save(&dir.join("final.snap"), &out.simulation)?;
    Ok(summary)
}

pub fn write_aggregate(path: &Path, agg: &Aggregate) -> Result<()> {
    write_csv(path, &agg.header(), &agg.rows())
}

pub fn write_drift(path: &Path, rows: &[DriftRecord]) -> Result<()> {
    let table: Vec<Vec<f64>> = rows.iter().map(|r| r.row().to_vec()).collect();
    write_csv(path, &crate::experiments::drift::DRIFT_COLUMNS, &table)
}
