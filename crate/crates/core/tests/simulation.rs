use htp_core::environment::{step_stimuli, EnvironmentParams, ScenarioSpec, StimulusSlot};
use htp_core::experiments::{Preset, Rule, Simulation, Study, TrialConfig};
use htp_core::io::snapshot;
use htp_core::rng::SimRngs;

fn mini(rule: Rule, seed: u64, seconds: f64) -> TrialConfig {
    let mut cfg = Preset::Mini.trial(Study::Run, rule, seed).unwrap();
    cfg.scenarios.truncate(1);
    cfg.scenarios[0].duration = seconds;
    cfg
}

fn pool_scenario(pool: Vec<usize>) -> ScenarioSpec {
    let mut spec = htp_core::environment::scenario_catalog("MINI_S1").unwrap();
    spec.stimulus_pool = pool;
    spec
}

#[test]
fn resumed_snapshot_continues_bit_identically() {
    let cfg = mini(Rule::Htp, 11, 900.0);
    let mut straight = Simulation::new(cfg.clone()).unwrap();
    let mut s1 = straight.empty_series();
    straight.advance(u64::MAX, &mut s1).unwrap();

    let mut first = Simulation::new(cfg).unwrap();
    let mut s2 = first.empty_series();
    first.advance(4321, &mut s2).unwrap();
    let bytes = snapshot::encode(&first).unwrap();
    drop(first);
    let mut resumed = snapshot::decode(&bytes).unwrap().state;
    resumed.advance(u64::MAX, &mut s2).unwrap();

    assert_eq!(resumed, straight);
    assert_eq!(s2, s1);
}

#[test]
fn occupancy_follows_binomial_three_half() {
    let env = EnvironmentParams::default();
    let spec = pool_scenario((0..30).collect());
    let mut rngs = SimRngs::new(21);
    let mut slots = vec![StimulusSlot::default(); env.slots];
    let mut currents = vec![0.0; 30];
    let dt = 0.1;
    let steps = 1_000_000;
    let mut counts = [0u64; 4];
    for k in 0..steps {
        let t = k as f64 * dt;
        step_stimuli(&mut slots, &spec, &env, 10.0, t, &mut rngs, &mut currents).unwrap();
        counts[slots.iter().filter(|s| s.active.is_some()).count()] += 1;
    }
    let expected = [1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0];
    for (c, e) in counts.iter().zip(expected) {
        let p = *c as f64 / steps as f64;
        assert!((p - e).abs() <= 0.01, "{counts:?}");
    }
}

#[test]
fn stimuli_drawn_uniformly_from_pool() {
    let env = EnvironmentParams::default();
    let pool: Vec<usize> = (5..25).collect();
    let spec = pool_scenario(pool.clone());
    let mut rngs = SimRngs::new(22);
    let mut slots = vec![StimulusSlot::default(); env.slots];
    let mut currents = vec![0.0; 30];
    let mut hits = vec![0u64; 30];
    for k in 0..400_000 {
        let onsets = step_stimuli(&mut slots, &spec, &env, 10.0, k as f64 * 0.1, &mut rngs, &mut currents).unwrap();
        for s in onsets {
            hits[s] += 1;
        }
    }
    assert!(hits.iter().enumerate().all(|(s, &h)| pool.contains(&s) || h == 0));
    let n: u64 = hits.iter().sum();
    let e = n as f64 / pool.len() as f64;
    let chi2: f64 = pool.iter().map(|&s| (hits[s] as f64 - e).powi(2) / e).sum();
    // 19 degrees of freedom, 0.1% critical value.
    assert!(chi2 < 43.82, "chi2 {chi2}");
}

#[test]
fn rewards_are_caused_and_delayed() {
    let cfg = mini(Rule::Htp, 23, 3.0 * 3600.0);
    let spec = cfg.scenarios[0].clone();
    let (lo, hi) = cfg.environment.reward_delay;
    let out = htp_core::experiments::run_trial(cfg).unwrap();
    let rewards = &out.simulation.rewards;
    assert!(rewards.len() > 50, "only {} rewards", rewards.len());
    let mut bins = [0u32; 3];
    for r in rewards {
        assert!(spec.rewards(r.pair.stimulus, r.pair.action));
        let delay = r.delivered_at - r.earned_at;
        assert!(delay >= lo - 0.1 - 1e-9 && delay <= hi + 0.1 + 1e-9, "delay {delay}");
        assert!((0.25..=0.75).contains(&r.amplitude));
        bins[(((delay - lo) / (hi - lo) * 3.0) as usize).min(2)] += 1;
    }
    let n = rewards.len() as f64;
    for b in bins {
        assert!((f64::from(b) / n - 1.0 / 3.0).abs() < 0.12, "{bins:?}");
    }
}

#[test]
fn long_term_weight_needs_a_threshold_crossing() {
    let mut cfg = mini(Rule::Htp, 24, 2.0 * 3600.0);
    cfg.plasticity.baseline_modulation = -0.005;
    let out = htp_core::experiments::run_trial(cfg).unwrap();
    let sim = &out.simulation;
    for (k, &lt) in sim.weights.lt.as_slice().iter().enumerate() {
        if lt > 0.0 {
            assert!(sim.crossed_threshold[k], "synapse {k}");
        }
    }
}

#[test]
fn long_term_weight_never_decreases() {
    let mut cfg = mini(Rule::Htp, 25, 1800.0);
    cfg.plasticity.baseline_modulation = -0.005;
    let mut sim = Simulation::new(cfg).unwrap();
    let mut prev = sim.weights.lt.clone();
    while sim.step().unwrap().is_some() {
        let now = sim.weights.lt.as_slice();
        assert!(now.iter().zip(prev.as_slice()).all(|(a, b)| a >= b));
        prev = sim.weights.lt.clone();
    }
}
