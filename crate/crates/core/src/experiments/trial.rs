//! Full network trials: the rate-based layer embedded in the stochastic
//! environment, stepped with a fixed update order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::environment::{
    check_reward, coactivation_onsets, emit_reward, step_stimuli, EnvironmentParams, Pair,
    RewardSchedule, ScenarioSpec, StimulusSlot,
};
use crate::error::{Error, Result};
use crate::experiments::metrics::{
    cumulative_weight, weight_summary, HistogramRecord, MetricsRecord, MetricsSeries,
};
use crate::matrix::Matrix;
use crate::network::{activation, compose, feedback_currents, select_action, ActionState, NetworkParams, WeightMatrix};
use crate::plasticity::{
    adapt_thresholds, long_term_step, measure_concentration, modulation_step, short_term_step,
    single_step, trace_step, ConcentrationWindow, CorrelationMode, ModulationState,
    PlasticityParams, ThresholdState,
};
use crate::rng::SimRngs;

/// Weight rule of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Single weight component updated by modulated traces.
    Rchp,
    /// Decaying short-term component plus consolidated long-term component.
    Htp,
}

impl Rule {
    pub fn default_mode(self) -> CorrelationMode {
        match self {
            Rule::Rchp => CorrelationMode::Full,
            Rule::Htp => CorrelationMode::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Rchp => "rchp",
            Rule::Htp => "htp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub network: NetworkParams,
    pub plasticity: PlasticityParams,
    pub environment: EnvironmentParams,
    pub rule: Rule,
    pub unlearning: bool,
    pub scenarios: Vec<ScenarioSpec>,
    pub seed: u64,
    /// Seconds between metric snapshots.
    pub snapshot_s: f64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.plasticity.validate()?;
        self.environment.validate()?;
        for s in &self.scenarios {
            s.validate(self.network.n_inputs, self.network.n_outputs)?;
        }
        if !(self.snapshot_s >= self.network.dt && self.snapshot_s.is_finite()) {
            return Err(Error::config("snapshot_s", "must be at least dt"));
        }
        Ok(())
    }

    pub fn steps_in(&self, scenario: &ScenarioSpec) -> u64 {
        (scenario.duration / self.network.dt).round() as u64
    }

    pub fn total_steps(&self) -> u64 {
        self.scenarios.iter().map(|s| self.steps_in(s)).sum()
    }

    pub fn snapshot_every(&self) -> u64 {
        ((self.snapshot_s / self.network.dt).round() as u64).max(1)
    }

    /// Distinct scenario ids in first-seen order.
    pub fn scenario_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for s in &self.scenarios {
            if !ids.contains(&s.id) {
                ids.push(s.id.clone());
            }
        }
        ids
    }

    /// Rewarded pairs of every scenario in the run.
    pub fn all_rewarded(&self) -> BTreeSet<Pair> {
        self.scenarios
            .iter()
            .flat_map(|s| s.rewarded_pairs.iter().copied())
            .collect()
    }

    /// Rewarded pairs grouped by scenario id, aligned with [`Self::scenario_ids`].
    pub fn rewarded_by_id(&self) -> Vec<BTreeSet<Pair>> {
        self.scenario_ids()
            .iter()
            .map(|id| {
                self.scenarios
                    .iter()
                    .filter(|s| &s.id == id)
                    .flat_map(|s| s.rewarded_pairs.iter().copied())
                    .collect()
            })
            .collect()
    }
}

/// A delivered reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub delivered_at: f64,
    pub earned_at: f64,
    pub amplitude: f64,
    pub pair: Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub v: Vec<f64>,
    /// Outputs one propagation step earlier.
    pub v_prev: Vec<f64>,
    pub currents: Vec<f64>,
}

impl Layer {
    fn new(n: usize) -> Self {
        Layer {
            v: vec![0.0; n],
            v_prev: vec![0.0; n],
            currents: vec![0.0; n],
        }
    }
}

/// What happened during one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub time: f64,
    pub reward: f64,
    pub delivered: usize,
    pub action_started: bool,
    pub scheduled: usize,
    pub active_slots: usize,
    pub correlations: u32,
    pub decorrelations: u32,
}

/// Complete mutable state of one network trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub config: TrialConfig,
    /// Steps taken since the start of the run.
    pub step: u64,
    pub scenario_index: usize,
    /// Steps taken inside the current scenario.
    pub scenario_step: u64,
    pub weights: WeightMatrix,
    pub traces: Matrix,
    pub modulation: ModulationState,
    pub thresholds: ThresholdState,
    pub window: ConcentrationWindow,
    pub inputs: Layer,
    pub outputs: Layer,
    pub action: ActionState,
    pub slots: Vec<StimulusSlot>,
    pub schedule: RewardSchedule,
    pub rngs: SimRngs,
    /// Synapses whose short-term weight has exceeded the consolidation threshold.
    pub crossed_threshold: Vec<bool>,
    pub rewards: Vec<RewardRecord>,
}

impl Simulation {
    pub fn new(config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let (n_in, n_out) = (config.network.n_inputs, config.network.n_outputs);
        Ok(Simulation {
            step: 0,
            scenario_index: 0,
            scenario_step: 0,
            weights: WeightMatrix::zeros(n_in, n_out),
            traces: Matrix::zeros(n_in, n_out),
            modulation: ModulationState::default(),
            thresholds: ThresholdState::initial(&config.plasticity),
            window: ConcentrationWindow::new(&config.plasticity, config.network.dt),
            inputs: Layer::new(n_in),
            outputs: Layer::new(n_out),
            action: ActionState::default(),
            slots: vec![StimulusSlot::default(); config.environment.slots],
            schedule: RewardSchedule::default(),
            rngs: SimRngs::new(config.seed),
            crossed_threshold: vec![false; n_in * n_out],
            rewards: Vec::new(),
            config,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.network.dt
    }

    /// Checks that every state array matches the configured network, as
    /// required of state restored from outside.
    pub fn check_consistency(&self) -> Result<()> {
        self.config.validate()?;
        let (n_in, n_out) = (self.config.network.n_inputs, self.config.network.n_outputs);
        let expect = Matrix::zeros(n_in, n_out);
        expect.ensure_shape(&self.weights.st, "short-term weights")?;
        expect.ensure_shape(&self.weights.lt, "long-term weights")?;
        expect.ensure_shape(&self.traces, "traces")?;
        let sizes = [
            ("input states", self.inputs.v.len(), n_in),
            ("previous input states", self.inputs.v_prev.len(), n_in),
            ("input currents", self.inputs.currents.len(), n_in),
            ("output states", self.outputs.v.len(), n_out),
            ("previous output states", self.outputs.v_prev.len(), n_out),
            ("output currents", self.outputs.currents.len(), n_out),
            ("stimulus slots", self.slots.len(), self.config.environment.slots),
            ("threshold flags", self.crossed_threshold.len(), n_in * n_out),
        ];
        for (what, found, want) in sizes {
            if found != want {
                return Err(Error::Shape(format!("{what}: {found} entries, expected {want}")));
            }
        }
        if self.scenario_index > self.config.scenarios.len() {
            return Err(Error::Shape("scenario index past the end of the run".into()));
        }
        Ok(())
    }

    pub fn is_finished(&self) -> bool {
        self.scenario_index >= self.config.scenarios.len()
    }

    fn skip_finished_scenarios(&mut self) {
        while let Some(s) = self.config.scenarios.get(self.scenario_index) {
            if self.scenario_step < self.config.steps_in(s) {
                break;
            }
            self.scenario_index += 1;
            self.scenario_step = 0;
        }
    }

    /// Advances one sampling step. Returns `None` once every scenario is done.
    pub fn step(&mut self) -> Result<Option<StepReport>> {
        self.skip_finished_scenarios();
        if self.is_finished() {
            return Ok(None);
        }
        let dt = self.config.network.dt;
        let t = self.time();
        let net = &self.config.network;
        let plast = &self.config.plasticity;
        let spec = &self.config.scenarios[self.scenario_index];
        let decays = plast.decays(dt);
        let mut report = StepReport {
            time: t,
            ..StepReport::default()
        };

        // Environment and reward channel.
        let onsets = step_stimuli(
            &mut self.slots,
            spec,
            &self.config.environment,
            net.stimulus_current,
            t,
            &mut self.rngs,
            &mut self.inputs.currents,
        )?;
        report.active_slots = self.slots.iter().filter(|s| s.active.is_some()).count();
        let (r, delivered) = emit_reward(&mut self.schedule, t, dt);
        report.reward = r;
        report.delivered = delivered.len();
        self.rewards.extend(delivered.into_iter().map(|p| RewardRecord {
            delivered_at: t,
            earned_at: p.earned_at,
            amplitude: p.amplitude,
            pair: p.pair,
        }));
        self.modulation.m = modulation_step(self.modulation.m, r, plast, decays.modulation, dt);

        // Network: inputs take the new stimulus currents, outputs see the
        // inputs one propagation step earlier.
        std::mem::swap(&mut self.inputs.v, &mut self.inputs.v_prev);
        for (v, &c) in self.inputs.v.iter_mut().zip(&self.inputs.currents) {
            *v = activation(c, net.gain, self.rngs.noise.gaussian(net.noise_std));
        }
        feedback_currents(&self.action, t, net.feedback_current, &mut self.outputs.currents);
        let mut u = self.outputs.currents.clone();
        let n_out = net.n_outputs;
        let st = self.weights.st.as_slice();
        let lt = self.weights.lt.as_slice();
        for (j, &vj) in self.inputs.v_prev.iter().enumerate() {
            let row = j * n_out;
            for (i, ui) in u.iter_mut().enumerate() {
                *ui += compose(st[row + i], lt[row + i]) * vj;
            }
        }
        std::mem::swap(&mut self.outputs.v, &mut self.outputs.v_prev);
        for (v, &ui) in self.outputs.v.iter_mut().zip(&u) {
            *v = activation(ui, net.gain, self.rngs.noise.gaussian(net.noise_std));
        }

        // Action selection and reward scheduling on co-activation onsets.
        let (action, started) = select_action(
            &self.outputs.v,
            self.action,
            t,
            net.action_duration,
            &mut self.rngs.action_durations,
        );
        self.action = action;
        report.action_started = started;
        if let Some(a) = action.current {
            let co = coactivation_onsets(&onsets, &self.slots, &action, started);
            report.scheduled = check_reward(
                &co,
                a,
                spec,
                &self.config.environment,
                t,
                &mut self.rngs,
                &mut self.schedule,
            );
        }

        // Plasticity: correlations, traces, weights, consolidation.
        let m = self.modulation.m;
        let th = self.thresholds;
        let psi = plast.consolidation_threshold;
        let lt_step = plast.consolidation_rate * dt;
        let (mut pos, mut neg) = (0u32, 0u32);
        let traces = self.traces.as_mut_slice();
        let (st, lt) = (self.weights.st.as_mut_slice(), self.weights.lt.as_mut_slice());
        for (j, &pre) in self.inputs.v_prev.iter().enumerate() {
            let row = j * n_out;
            for (i, &post) in self.outputs.v.iter().enumerate() {
                let k = row + i;
                let product = pre * post;
                let theta = if product > th.theta_hi {
                    pos += 1;
                    match plast.mode {
                        CorrelationMode::Plus => 1.0,
                        CorrelationMode::Full => plast.alpha,
                    }
                } else if plast.mode == CorrelationMode::Full && product < th.theta_lo {
                    neg += 1;
                    -plast.beta
                } else {
                    0.0
                };
                let e = trace_step(traces[k], theta, decays.trace);
                traces[k] = e;
                match self.config.rule {
                    Rule::Htp => {
                        let s = short_term_step(st[k], m, e, decays.short_term, dt);
                        st[k] = s;
                        if s > psi {
                            self.crossed_threshold[k] = true;
                        }
                        lt[k] = long_term_step(s, lt[k], psi, lt_step, self.config.unlearning);
                    }
                    Rule::Rchp => lt[k] = single_step(lt[k], m, e, dt),
                }
            }
        }
        report.correlations = pos;
        report.decorrelations = neg;

        self.window.push(pos, neg, decays.concentration);
        let (omega_c, omega_d) = measure_concentration(&self.window, plast, dt, st.len());
        self.thresholds.omega_c = omega_c;
        self.thresholds.omega_d = omega_d;
        self.thresholds = adapt_thresholds(self.thresholds, plast, dt);

        self.step += 1;
        self.scenario_step += 1;
        Ok(Some(report))
    }

    /// Metric snapshot of the current state.
    pub fn observe(&self) -> (MetricsRecord, HistogramRecord) {
        let t = self.time();
        let summary = weight_summary(&self.weights, &self.config.all_rewarded());
        let cumulative = self
            .config
            .rewarded_by_id()
            .iter()
            .map(|pairs| cumulative_weight(&self.weights, pairs))
            .collect();
        let since = t - 3600.0;
        let rewards_last_hour = self
            .rewards
            .iter()
            .rev()
            .take_while(|r| r.delivered_at > since)
            .count() as u32;
        let record = MetricsRecord {
            time: t,
            scenario: self.scenario_index.min(self.config.scenarios.len().saturating_sub(1)),
            rewards_last_hour,
            cumulative,
            mean_rewarded: summary.mean_rewarded,
            mean_nonrewarded: summary.mean_nonrewarded,
            max_nonrewarded: summary.max_nonrewarded,
            frac_nonrewarded_potentiated: summary.frac_nonrewarded_potentiated,
            nonrewarded_lt_nonzero: summary.nonrewarded_lt_nonzero,
            modulation: self.modulation.m,
            theta_hi: self.thresholds.theta_hi,
            theta_lo: self.thresholds.theta_lo,
            omega_c: self.thresholds.omega_c,
        };
        let hist = HistogramRecord {
            time: t,
            short_term: summary.hist_short_term,
            long_term: summary.hist_long_term,
            total: summary.hist_total,
        };
        (record, hist)
    }

    /// Runs up to `max_steps` steps, appending a snapshot to `series` after
    /// every `snapshot_every`-th step of the run. Returns the steps taken.
    pub fn advance(&mut self, max_steps: u64, series: &mut MetricsSeries) -> Result<u64> {
        let every = self.config.snapshot_every();
        let mut taken = 0;
        while taken < max_steps {
            if self.step()?.is_none() {
                break;
            }
            taken += 1;
            if self.step % every == 0 {
                let (record, hist) = self.observe();
                series.records.push(record);
                series.histograms.push(hist);
            }
        }
        Ok(taken)
    }

    pub fn empty_series(&self) -> MetricsSeries {
        MetricsSeries {
            scenario_ids: self.config.scenario_ids(),
            ..MetricsSeries::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub series: MetricsSeries,
    pub simulation: Simulation,
}

impl TrialOutput {
    pub fn reward_times(&self) -> Vec<f64> {
        self.simulation.rewards.iter().map(|r| r.delivered_at).collect()
    }
}

/// Runs every scenario of `cfg` in sequence, carrying the network across them.
pub fn run_trial(cfg: TrialConfig) -> Result<TrialOutput> {
    let mut simulation = Simulation::new(cfg)?;
    let mut series = simulation.empty_series();
    simulation.advance(u64::MAX, &mut series)?;
    Ok(TrialOutput { series, simulation })
}
