use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::environment::Pair;
use crate::network::{compose, WeightMatrix};

/// Fixed-edge histogram over `[lo, hi]`; out-of-range values land in the end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u32>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Histogram {
            lo,
            hi,
            counts: vec![0; bins],
        }
    }

    pub fn add(&mut self, x: f64) {
        let n = self.counts.len();
        let pos = ((x - self.lo) / (self.hi - self.lo) * n as f64).floor();
        let bin = if pos.is_nan() || pos < 0.0 {
            0
        } else {
            (pos as usize).min(n - 1)
        };
        self.counts[bin] += 1;
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / n as f64)
            .collect()
    }
}

pub const HISTOGRAM_BINS: usize = 20;

/// Threshold above which a non-rewarded synapse counts as potentiated.
pub const POTENTIATION_LEVEL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub mean_rewarded: f64,
    pub mean_nonrewarded: f64,
    pub max_nonrewarded: f64,
    /// Fraction of non-rewarded synapses whose total weight exceeds 0.1.
    pub frac_nonrewarded_potentiated: f64,
    pub cumulative_rewarded: f64,
    /// Non-rewarded synapses with a non-zero long-term component.
    pub nonrewarded_lt_nonzero: usize,
    pub hist_short_term: Histogram,
    pub hist_long_term: Histogram,
    pub hist_total: Histogram,
}

pub fn weight_summary(wm: &WeightMatrix, rewarded: &BTreeSet<Pair>) -> WeightSummary {
    let (rows, cols) = wm.shape();
    let mut hist_short_term = Histogram::new(-1.0, 1.0, HISTOGRAM_BINS);
    let mut hist_long_term = Histogram::new(0.0, 1.0, HISTOGRAM_BINS);
    let mut hist_total = Histogram::new(0.0, 1.0, HISTOGRAM_BINS);
    let (mut sum_r, mut n_r) = (0.0, 0usize);
    let (mut sum_n, mut n_n, mut max_n, mut potentiated, mut lt_nonzero) = (0.0, 0usize, 0.0f64, 0usize, 0usize);
    for j in 0..rows {
        for i in 0..cols {
            let st = wm.st.get(j, i);
            let lt = wm.lt.get(j, i);
            let w = compose(st, lt);
            hist_short_term.add(st);
            hist_long_term.add(lt);
            hist_total.add(w);
            if rewarded.contains(&Pair::new(j, i)) {
                sum_r += w;
                n_r += 1;
            } else {
                sum_n += w;
                n_n += 1;
                max_n = max_n.max(w);
                potentiated += usize::from(w > POTENTIATION_LEVEL);
                lt_nonzero += usize::from(lt > 0.0);
            }
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
    WeightSummary {
        mean_rewarded: mean(sum_r, n_r),
        mean_nonrewarded: mean(sum_n, n_n),
        max_nonrewarded: max_n,
        frac_nonrewarded_potentiated: mean(potentiated as f64, n_n),
        cumulative_rewarded: sum_r,
        nonrewarded_lt_nonzero: lt_nonzero,
        hist_short_term,
        hist_long_term,
        hist_total,
    }
}

/// Sum of total weights over a pair set.
pub fn cumulative_weight(wm: &WeightMatrix, pairs: &BTreeSet<Pair>) -> f64 {
    pairs.iter().map(|p| wm.total(p.stimulus, p.action)).sum()
}

/// Counts delivered rewards per consecutive `window`-second bucket over
/// `[0, horizon)`. Events at or past the horizon are ignored.
pub fn reward_rate(times: &[f64], window: f64, horizon: f64) -> Vec<u32> {
    let n = (horizon / window).ceil().max(0.0) as usize;
    let mut buckets = vec![0; n];
    for &t in times {
        if t >= 0.0 && t < horizon {
            let k = ((t / window).floor() as usize).min(n.saturating_sub(1));
            buckets[k] += 1;
        }
    }
    buckets
}

/// One periodic observation of a running trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub time: f64,
    pub scenario: usize,
    pub rewards_last_hour: u32,
    /// Cumulative rewarded weight for each scenario id of the run.
    pub cumulative: Vec<f64>,
    pub mean_rewarded: f64,
    pub mean_nonrewarded: f64,
    pub max_nonrewarded: f64,
    pub frac_nonrewarded_potentiated: f64,
    pub nonrewarded_lt_nonzero: usize,
    pub modulation: f64,
    pub theta_hi: f64,
    pub theta_lo: f64,
    pub omega_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub time: f64,
    pub short_term: Histogram,
    pub long_term: Histogram,
    pub total: Histogram,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsSeries {
    /// Distinct scenario ids, in first-seen order; names the `cumulative` entries.
    pub scenario_ids: Vec<String>,
    pub records: Vec<MetricsRecord>,
    pub histograms: Vec<HistogramRecord>,
}

impl MetricsSeries {
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["time_s".to_string(), "scenario".into(), "rewards_last_hour".into()];
        cols.extend(self.scenario_ids.iter().map(|id| format!("cum_w_{id}")));
        cols.extend(
            [
                "mean_rewarded",
                "mean_nonrewarded",
                "max_nonrewarded",
                "frac_nonrewarded_gt_0_1",
                "nonrewarded_lt_nonzero",
                "modulation",
                "theta_hi",
                "theta_lo",
                "omega_c",
            ]
            .map(String::from),
        );
        cols
    }

    pub fn row(record: &MetricsRecord) -> Vec<f64> {
        let mut v = vec![record.time, record.scenario as f64, f64::from(record.rewards_last_hour)];
        v.extend_from_slice(&record.cumulative);
        v.extend([
            record.mean_rewarded,
            record.mean_nonrewarded,
            record.max_nonrewarded,
            record.frac_nonrewarded_potentiated,
            record.nonrewarded_lt_nonzero as f64,
            record.modulation,
            record.theta_hi,
            record.theta_lo,
            record.omega_c,
        ]);
        v
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(Self::row).collect()
    }

    /// Values of one named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns().iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| Self::row(r)[k]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn rewarded_diag(n: usize) -> BTreeSet<Pair> {
        (0..n).map(|i| Pair::new(i, i)).collect()
    }

    #[test]
    fn empty_weights_summarize_to_zero() {
        let s = weight_summary(&WeightMatrix::zeros(5, 4), &rewarded_diag(3));
        assert_eq!(s.mean_rewarded, 0.0);
        assert_eq!(s.mean_nonrewarded, 0.0);
        assert_eq!(s.max_nonrewarded, 0.0);
        assert_eq!(s.frac_nonrewarded_potentiated, 0.0);
        assert_eq!(s.cumulative_rewarded, 0.0);
        assert_eq!(s.nonrewarded_lt_nonzero, 0);
        assert_eq!(s.hist_total.counts[0], 20);
    }

    #[test]
    fn saturated_rewarded_pairs() {
        let rewarded = rewarded_diag(3);
        let mut wm = WeightMatrix::zeros(5, 4);
        for p in &rewarded {
            wm.lt.set(p.stimulus, p.action, 1.0);
        }
        let s = weight_summary(&wm, &rewarded);
        assert_eq!(s.cumulative_rewarded, 3.0);
        assert_eq!(s.mean_rewarded, 1.0);
        assert_eq!(s.frac_nonrewarded_potentiated, 0.0);
        assert_eq!(s.hist_long_term.counts[HISTOGRAM_BINS - 1], 3);
        assert_eq!(cumulative_weight(&wm, &rewarded), 3.0);
    }

    #[test]
    fn potentiation_fraction_counts_above_level() {
        let wm = WeightMatrix {
            st: Matrix::from_vec(2, 2, vec![0.2, 0.05, 0.11, -0.3]).unwrap(),
            lt: Matrix::zeros(2, 2),
        };
        let s = weight_summary(&wm, &BTreeSet::new());
        assert_eq!(s.frac_nonrewarded_potentiated, 0.5);
        assert_eq!(s.max_nonrewarded, 0.2);
    }

    #[test]
    fn reward_rate_examples() {
        assert_eq!(reward_rate(&[], 3600.0, 4.0 * 3600.0), vec![0; 4]);
        let hour2: Vec<f64> = (0..10).map(|k| 7200.0 + k as f64 * 100.0).collect();
        assert_eq!(reward_rate(&hour2, 3600.0, 4.0 * 3600.0), vec![0, 0, 10, 0]);
        assert_eq!(reward_rate(&[3599.9, 3600.1], 3600.0, 7200.0), vec![1, 1]);
    }

    #[test]
    fn histogram_edges_cover_range() {
        let h = Histogram::new(-1.0, 1.0, 4);
        assert_eq!(h.edges(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
