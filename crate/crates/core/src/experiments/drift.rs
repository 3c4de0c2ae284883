//! Scalar studies: a single synapse driven by random modulatory updates that
//! arrive once per episode, compared under one- and two-component weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::compose;
use crate::plasticity::{long_term_step, PlasticityParams};
use crate::rng::{rng_stream, Stream};

/// A block of episodes whose updates are drawn from `U(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub lo: f64,
    pub hi: f64,
    pub episodes: usize,
}

impl Phase {
    pub const fn new(lo: f64, hi: f64, episodes: usize) -> Self {
        Phase { lo, hi, episodes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftConfig {
    pub phases: Vec<Phase>,
    /// Seconds between consecutive episodes.
    pub interval: f64,
    pub initial_weight: f64,
    pub tau_short_term: f64,
    pub consolidation_rate: f64,
    pub consolidation_threshold: f64,
    pub unlearning: bool,
    pub seed: u64,
}

pub const EPISODES_PER_PHASE: usize = 1000;
pub const EPISODE_INTERVAL: f64 = 300.0;

impl DriftConfig {
    /// Zero-mean noise, silence, then positively biased noise.
    pub fn drift(seed: u64) -> Self {
        Self::with_phases(
            vec![
                Phase::new(-0.06, 0.06, EPISODES_PER_PHASE),
                Phase::new(0.0, 0.0, EPISODES_PER_PHASE),
                Phase::new(-0.03, 0.09, EPISODES_PER_PHASE),
            ],
            false,
            seed,
        )
    }

    /// Positively biased noise, silence, then negatively biased noise, with
    /// long-term decrements enabled.
    pub fn unlearning(seed: u64) -> Self {
        let mut cfg = Self::with_phases(
            vec![
                Phase::new(-0.03, 0.09, EPISODES_PER_PHASE),
                Phase::new(0.0, 0.0, EPISODES_PER_PHASE),
                Phase::new(-0.09, 0.03, EPISODES_PER_PHASE),
            ],
            true,
            seed,
        );
        cfg.initial_weight = 0.0;
        cfg
    }

    fn with_phases(phases: Vec<Phase>, unlearning: bool, seed: u64) -> Self {
        let p = PlasticityParams::default();
        DriftConfig {
            phases,
            interval: EPISODE_INTERVAL,
            initial_weight: 0.5,
            tau_short_term: p.tau_short_term,
            consolidation_rate: p.consolidation_rate,
            consolidation_threshold: p.consolidation_threshold,
            unlearning,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::config("phases", "at least one phase is required"));
        }
        for (k, p) in self.phases.iter().enumerate() {
            if p.episodes == 0 {
                return Err(Error::config(format!("phases.{k}.episodes"), "must be positive"));
            }
            if !(p.lo.is_finite() && p.hi.is_finite()) || p.hi < p.lo {
                return Err(Error::config(format!("phases.{k}"), "need finite lo <= hi"));
            }
        }
        if !(self.interval > 0.0 && self.tau_short_term > 0.0) {
            return Err(Error::config("interval", "interval and tau_short_term must be positive"));
        }
        if !(0.0..=1.0).contains(&self.initial_weight) {
            return Err(Error::config("initial_weight", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn total_episodes(&self) -> usize {
        self.phases.iter().map(|p| p.episodes).sum()
    }
}

/// State after one episode. `single` follows the one-component rule, the
/// other fields the two-component rule under the same update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub episode: usize,
    pub phase: usize,
    pub update: f64,
    pub single: f64,
    pub short_term: f64,
    pub long_term: f64,
    pub total: f64,
}

pub const DRIFT_COLUMNS: [&str; 7] = [
    "episode",
    "phase",
    "update",
    "w_single",
    "w_st",
    "w_lt",
    "w_total",
];

impl DriftRecord {
    pub fn row(&self) -> [f64; 7] {
        [
            self.episode as f64,
            self.phase as f64,
            self.update,
            self.single,
            self.short_term,
            self.long_term,
            self.total,
        ]
    }
}

/// Runs both weight models over the same update sequence.
pub fn run_drift(cfg: &DriftConfig) -> Result<Vec<DriftRecord>> {
    cfg.validate()?;
    let mut rng = rng_stream(cfg.seed, Stream::ScalarUpdates);
    let decay = (-cfg.interval / cfg.tau_short_term).exp();
    let step = cfg.consolidation_rate * cfg.interval;
    let mut single = cfg.initial_weight;
    let (mut st, mut lt) = (0.0_f64, cfg.initial_weight);
    let mut out = Vec::with_capacity(cfg.total_episodes());
    let mut episode = 0;
    for (phase, p) in cfg.phases.iter().enumerate() {
        for _ in 0..p.episodes {
            let u = rng.uniform(p.lo, p.hi);
            single = (single + u).clamp(0.0, 1.0);
            st = (st * decay + u).clamp(-1.0, 1.0);
            lt = long_term_step(st, lt, cfg.consolidation_threshold, step, cfg.unlearning);
            out.push(DriftRecord {
                episode,
                phase,
                update: u,
                single,
                short_term: st,
                long_term: lt,
                total: compose(st, lt),
            });
            episode += 1;
        }
    }
    Ok(out)
}
