//! Repeated trials over consecutive seeds and their per-snapshot statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::metrics::MetricsSeries;
use crate::experiments::trial::{run_trial, TrialConfig, TrialOutput};

/// Order statistics of one column at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub const STAT_NAMES: [&str; 6] = ["mean", "min", "q1", "median", "q3", "max"];

impl Stats {
    /// Summarizes `values`; the sum runs over the sorted values so the result
    /// does not depend on input order.
    pub fn of(values: &[f64]) -> Stats {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return Stats {
                mean: f64::NAN,
                min: f64::NAN,
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
                max: f64::NAN,
            };
        }
        let sum: f64 = v.iter().sum();
        Stats {
            mean: sum / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        }
    }

    pub fn values(&self) -> [f64; 6] {
        [self.mean, self.min, self.q1, self.median, self.q3, self.max]
    }
}

/// Linear-interpolation quantile of sorted, non-empty data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Statistics across trials for every metric column at every shared snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    /// Metric columns, without `time_s`.
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    /// `stats[k][c]`: snapshot `k`, column `c`.
    pub stats: Vec<Vec<Stats>>,
}

impl Aggregate {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["time_s".to_string()];
        for c in &self.columns {
            h.extend(STAT_NAMES.iter().map(|s| format!("{c}_{s}")));
        }
        h
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.stats)
            .map(|(&t, per_col)| {
                let mut row = vec![t];
                for s in per_col {
                    row.extend(s.values());
                }
                row
            })
            .collect()
    }
}

/// Aggregates series that share column layout. Snapshots beyond the shortest
/// series are dropped.
pub fn aggregate(series: &[&MetricsSeries]) -> Result<Aggregate> {
    let first = series
        .first()
        .ok_or_else(|| Error::config("trials", "at least one trial is required"))?;
    let columns = first.columns();
    if let Some(bad) = series.iter().find(|s| s.columns() != columns) {
        return Err(Error::config(
            "scenarios",
            format!("trial column layouts differ: {:?}", bad.scenario_ids),
        ));
    }
    let n = series.iter().map(|s| s.records.len()).min().unwrap_or(0);
    let tables: Vec<Vec<Vec<f64>>> = series.iter().map(|s| s.rows()).collect();
    let mut times = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(n);
    for k in 0..n {
        times.push(tables[0][k][0]);
        let per_col = (1..columns.len())
            .map(|c| {
                let values: Vec<f64> = tables.iter().map(|t| t[k][c]).collect();
                Stats::of(&values)
            })
            .collect();
        stats.push(per_col);
    }
    Ok(Aggregate {
        trials: series.len(),
        columns: columns[1..].to_vec(),
        times,
        stats,
    })
}

pub struct SuiteOutput {
    /// Trial outputs in seed order.
    pub trials: Vec<TrialOutput>,
    pub aggregate: Aggregate,
}

/// Runs `n_trials` trials with seeds `base_seed..base_seed + n_trials` on up
/// to `threads` worker threads (0 lets the pool decide), then aggregates.
pub fn run_suite<F>(make: F, n_trials: usize, base_seed: u64, threads: usize) -> Result<SuiteOutput>
where
    F: Fn(u64) -> Result<TrialConfig> + Sync,
{
    if n_trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("parallel", e.to_string()))?;
    let trials = pool.install(|| {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|k| make(base_seed + k).and_then(run_trial))
            .collect::<Result<Vec<_>>>()
    })?;
    let refs: Vec<&MetricsSeries> = trials.iter().map(|t| &t.series).collect();
    let aggregate = aggregate(&refs)?;
    Ok(SuiteOutput { trials, aggregate })
}
