//! The stochastic world the network acts in: an asynchronous stimulus flow
//! over three independent slots, scenario-specific rewarded stimulus-action
//! pairs, and a delayed, stochastic reward channel.
//!
//! Stimulus and action indices are zero-based internally. Scenario tables and
//! config files use one-based labels; [`Pair::from_labels`] converts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ActionState;
use crate::rng::SimRngs;

/// A zero-based (stimulus, action) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub stimulus: usize,
    pub action: usize,
}

impl Pair {
    pub fn new(stimulus: usize, action: usize) -> Self {
        Pair { stimulus, action }
    }

    /// Builds a pair from one-based labels.
    pub fn from_labels(stimulus: usize, action: usize) -> Self {
        Pair::new(stimulus - 1, action - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub rewarded_pairs: BTreeSet<Pair>,
    pub stimulus_pool: Vec<usize>,
    /// Seconds.
    pub duration: f64,
}

impl ScenarioSpec {
    pub fn rewards(&self, stimulus: usize, action: usize) -> bool {
        self.rewarded_pairs.contains(&Pair::new(stimulus, action))
    }

    pub fn validate(&self, n_inputs: usize, n_outputs: usize) -> Result<()> {
        if self.stimulus_pool.is_empty() {
            return Err(Error::config(
                format!("scenarios.{}.stimulus_pool", self.id),
                "pool is empty",
            ));
        }
        if let Some(s) = self.stimulus_pool.iter().find(|&&s| s >= n_inputs) {
            return Err(Error::config(
                format!("scenarios.{}.stimulus_pool", self.id),
                format!("stimulus {} exceeds {n_inputs} inputs", s + 1),
            ));
        }
        for p in &self.rewarded_pairs {
            if p.stimulus >= n_inputs || p.action >= n_outputs {
                return Err(Error::config(
                    format!("scenarios.{}.rewarded_pairs", self.id),
                    format!(
                        "pair ({}, {}) outside {n_inputs}x{n_outputs}",
                        p.stimulus + 1,
                        p.action + 1
                    ),
                ));
            }
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::config(
                format!("scenarios.{}.duration_s", self.id),
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    /// Number of independent stimulus slots.
    pub slots: usize,
    /// Probability that an expired slot shows a stimulus next.
    pub stimulus_probability: f64,
    /// Stimulus (and idle interval) duration range, seconds.
    pub stimulus_duration: (f64, f64),
    /// Reward delay range, seconds.
    pub reward_delay: (f64, f64),
    pub reward_amplitude: (f64, f64),
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        EnvironmentParams {
            slots: 3,
            stimulus_probability: 0.5,
            stimulus_duration: (1.0, 2.0),
            reward_delay: (1.0, 4.0),
            reward_amplitude: (0.25, 0.75),
        }
    }
}

impl EnvironmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(Error::config("slots", "need at least one stimulus slot"));
        }
        if !(0.0..=1.0).contains(&self.stimulus_probability) {
            return Err(Error::config("stimulus_probability", "must lie in [0, 1]"));
        }
        for (key, (lo, hi)) in [
            ("stimulus_duration", self.stimulus_duration),
            ("reward_delay", self.reward_delay),
            ("reward_amplitude", self.reward_amplitude),
        ] {
            if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::config(key, "need 0 <= min <= max"));
            }
        }
        if self.stimulus_duration.0 <= 0.0 {
            return Err(Error::config("stimulus_duration", "minimum must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StimulusSlot {
    pub active: Option<usize>,
    pub ends_at: f64,
}

/// A reward waiting for delivery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingReward {
    pub delivery_time: f64,
    pub amplitude: f64,
    /// Time of the co-activation that earned it.
    pub earned_at: f64,
    pub pair: Pair,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardSchedule {
    pub pending: Vec<PendingReward>,
}

/// Redraws expired slots and writes the input currents. Returns the stimuli
/// that became active this step and were not already shown by another slot.
pub fn step_stimuli(
    slots: &mut [StimulusSlot],
    spec: &ScenarioSpec,
    env: &EnvironmentParams,
    current: f64,
    t: f64,
    rngs: &mut SimRngs,
    currents: &mut [f64],
) -> Result<Vec<usize>> {
    if spec.stimulus_pool.is_empty() {
        return Err(Error::config(
            format!("scenarios.{}.stimulus_pool", spec.id),
            "pool is empty",
        ));
    }
    let before: Vec<Option<usize>> = slots.iter().map(|s| s.active).collect();
    for slot in slots.iter_mut() {
        if t < slot.ends_at {
            continue;
        }
        slot.active = if rngs.stimuli.coin(env.stimulus_probability) {
            Some(spec.stimulus_pool[rngs.stimuli.index(spec.stimulus_pool.len())])
        } else {
            None
        };
        let (lo, hi) = env.stimulus_duration;
        slot.ends_at = t + rngs.stimulus_durations.uniform(lo, hi);
    }

    currents.iter_mut().for_each(|c| *c = 0.0);
    let mut onsets = Vec::new();
    for slot in slots.iter() {
        if let Some(s) = slot.active {
            currents[s] = current;
            if !before.contains(&Some(s)) && !onsets.contains(&s) {
                onsets.push(s);
            }
        }
    }
    Ok(onsets)
}

/// Distinct stimuli currently shown.
pub fn active_stimuli(slots: &[StimulusSlot]) -> Vec<usize> {
    let mut out: Vec<usize> = slots.iter().filter_map(|s| s.active).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Schedules one reward for every rewarded pair among `stimuli x {action}`.
pub fn check_reward(
    stimuli: &[usize],
    action: usize,
    spec: &ScenarioSpec,
    env: &EnvironmentParams,
    t: f64,
    rngs: &mut SimRngs,
    sched: &mut RewardSchedule,
) -> usize {
    let mut scheduled = 0;
    for &s in stimuli {
        if spec.rewards(s, action) {
            let delay = rngs.reward_delay.uniform(env.reward_delay.0, env.reward_delay.1);
            let amplitude = rngs
                .reward_amplitude
                .uniform(env.reward_amplitude.0, env.reward_amplitude.1);
            sched.pending.push(PendingReward {
                delivery_time: t + delay,
                amplitude,
                earned_at: t,
                pair: Pair::new(s, action),
            });
            scheduled += 1;
        }
    }
    scheduled
}

/// Co-activation onsets at this step: a new action meets every shown stimulus,
/// and a running action meets every newly shown stimulus.
pub fn coactivation_onsets(
    onsets: &[usize],
    slots: &[StimulusSlot],
    action: &ActionState,
    action_started: bool,
) -> Vec<usize> {
    match (action.current, action_started) {
        (Some(_), true) => active_stimuli(slots),
        (Some(_), false) => onsets.to_vec(),
        (None, _) => Vec::new(),
    }
}

/// Removes and returns the rewards due in `[t, t + dt)` (and any overdue).
pub fn emit_reward(sched: &mut RewardSchedule, t: f64, dt: f64) -> (f64, Vec<PendingReward>) {
    let horizon = t + dt;
    let mut delivered = Vec::new();
    sched.pending.retain(|p| {
        if p.delivery_time < horizon {
            delivered.push(*p);
            false
        } else {
            true
        }
    });
    let r = delivered.iter().map(|p| p.amplitude).sum();
    (r, delivered)
}

fn labels(range: std::ops::RangeInclusive<usize>) -> impl Iterator<Item = usize> {
    range.map(|l| l - 1)
}

fn scenario(id: &str, pairs: impl IntoIterator<Item = (usize, usize)>, pool: Vec<usize>, hours: f64) -> ScenarioSpec {
    ScenarioSpec {
        id: id.to_string(),
        rewarded_pairs: pairs.into_iter().map(|(s, a)| Pair::from_labels(s, a)).collect(),
        stimulus_pool: pool,
        duration: hours * 3600.0,
    }
}

fn checkerboard(stimuli: std::ops::RangeInclusive<usize>) -> Vec<(usize, usize)> {
    stimuli
        .flat_map(|s| (1..=6).filter(move |a| (s + a) % 2 == 0).map(move |a| (s, a)))
        .collect()
}

/// Looks up a named scenario (case-insensitive).
///
/// Full scale (300 inputs): `S1`, `S2`, `S3` for 24 h each and the 48 h
/// `CHECKER_A` / `CHECKER_B` pair for 10 outputs. Mini scale (30 inputs,
/// 10 outputs, 2 h): `MINI_S1`, `MINI_S2`, `MINI_S3`, `MINI_CHECKER_A`,
/// `MINI_CHECKER_B`.
pub fn scenario_catalog(name: &str) -> Result<ScenarioSpec> {
    let id = name.to_ascii_uppercase();
    let spec = match id.as_str() {
        "S1" => scenario(
            "S1",
            (1..=10).map(|i| (i, i)),
            labels(1..=10).chain(labels(31..=300)).collect(),
            24.0,
        ),
        "S2" => scenario(
            "S2",
            (11..=20).map(|i| (i, i - 5)),
            labels(11..=20).chain(labels(31..=300)).collect(),
            24.0,
        ),
        "S3" => scenario(
            "S3",
            (21..=30).map(|i| (i, i - 20)),
            labels(21..=300).collect(),
            24.0,
        ),
        "CHECKER_A" => scenario(
            "CHECKER_A",
            checkerboard(1..=6),
            labels(1..=6).chain(labels(13..=300)).collect(),
            48.0,
        ),
        "CHECKER_B" => scenario(
            "CHECKER_B",
            checkerboard(7..=12),
            labels(7..=12).chain(labels(13..=300)).collect(),
            48.0,
        ),
        "MINI_S1" => scenario(
            "MINI_S1",
            (1..=3).map(|i| (i, i)),
            labels(1..=3).chain(labels(10..=30)).collect(),
            2.0,
        ),
        "MINI_S2" => scenario(
            "MINI_S2",
            (4..=6).map(|i| (i, i - 1)),
            labels(4..=6).chain(labels(10..=30)).collect(),
            2.0,
        ),
        "MINI_S3" => scenario(
            "MINI_S3",
            (7..=9).map(|i| (i, i - 6)),
            labels(7..=30).collect(),
            2.0,
        ),
        "MINI_CHECKER_A" => scenario(
            "MINI_CHECKER_A",
            checkerboard(1..=6),
            labels(1..=6).chain(labels(13..=30)).collect(),
            4.0,
        ),
        "MINI_CHECKER_B" => scenario(
            "MINI_CHECKER_B",
            checkerboard(7..=12),
            labels(7..=12).chain(labels(13..=30)).collect(),
            4.0,
        ),
        _ => return Err(Error::UnknownScenario(name.to_string())),
    };
    Ok(spec)
}
