//! Learning dynamics: thresholded Hebbian correlation detection, eligibility
//! traces, the global modulation signal, single- and two-component weight
//! updates, consolidation and the adaptive correlation thresholds.
//!
//! All leaky integrators use the exact exponential step
//! `x(t + dt) = x(t) exp(-dt / tau) + input`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::WeightMatrix;

/// Which correlation events the Hebbian filter emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// `+alpha` above the high threshold, `-beta` below the low one.
    Full,
    /// `+1` above the high threshold only.
    Plus,
}

/// How the recent correlation concentration is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationEstimator {
    /// Sum over a sliding window, scaled by `dt / window`.
    Window,
    /// Leaky integrator with time constant equal to the window length.
    Leaky,
}

/// Whether the concentration is compared to the target as a network total or
/// as a fraction of the synapse count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationNorm {
    Total,
    PerSynapse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticityParams {
    /// Reward gain on the modulation signal.
    pub learning_rate: f64,
    /// Baseline modulation per second.
    pub baseline_modulation: f64,
    pub tau_modulation: f64,
    pub tau_trace: f64,
    pub tau_short_term: f64,
    /// Long-term growth per second while the short-term weight is above threshold.
    pub consolidation_rate: f64,
    pub consolidation_threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Target correlation rate per second.
    pub target_rate: f64,
    /// Threshold adaptation per second.
    pub threshold_rate: f64,
    /// Length in seconds of the concentration window.
    pub correlation_window: f64,
    pub mode: CorrelationMode,
    pub estimator: ConcentrationEstimator,
    pub normalization: ConcentrationNorm,
    pub initial_theta_hi: f64,
    pub initial_theta_lo: f64,
}

impl Default for PlasticityParams {
    fn default() -> Self {
        PlasticityParams {
            learning_rate: 0.1,
            baseline_modulation: -0.03,
            tau_modulation: 0.1,
            tau_trace: 4.0,
            tau_short_term: 8.0 * 3600.0,
            consolidation_rate: 1.0 / 1800.0,
            consolidation_threshold: 0.95,
            alpha: 1.0,
            beta: 1.0,
            target_rate: 0.001,
            threshold_rate: 0.001,
            correlation_window: 5.0,
            mode: CorrelationMode::Plus,
            estimator: ConcentrationEstimator::Window,
            normalization: ConcentrationNorm::PerSynapse,
            initial_theta_hi: 0.8,
            initial_theta_lo: 1e-6,
        }
    }
}

impl PlasticityParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_modulation", self.tau_modulation),
            ("tau_trace", self.tau_trace),
            ("tau_short_term", self.tau_short_term),
            ("target_rate", self.target_rate),
            ("threshold_rate", self.threshold_rate),
            ("correlation_window", self.correlation_window),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(key, "must be positive and finite"));
            }
        }
        if !(self.consolidation_threshold > 0.0 && self.consolidation_threshold < 1.0) {
            return Err(Error::config("consolidation_threshold", "must lie in (0, 1)"));
        }
        for (key, value) in [
            ("learning_rate", self.learning_rate),
            ("baseline_modulation", self.baseline_modulation),
            ("consolidation_rate", self.consolidation_rate),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !value.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        if self.consolidation_rate < 0.0 {
            return Err(Error::config("consolidation_rate", "must be non-negative"));
        }
        if self.initial_theta_hi <= self.initial_theta_lo {
            return Err(Error::config("initial_theta_hi", "must exceed initial_theta_lo"));
        }
        Ok(())
    }

    /// Per-step decay factors for a given sampling step.
    pub fn decays(&self, dt: f64) -> Decays {
        Decays {
            modulation: (-dt / self.tau_modulation).exp(),
            trace: (-dt / self.tau_trace).exp(),
            short_term: (-dt / self.tau_short_term).exp(),
            concentration: (-dt / self.correlation_window).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decays {
    pub modulation: f64,
    pub trace: f64,
    pub short_term: f64,
    pub concentration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModulationState {
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdState {
    pub theta_hi: f64,
    pub theta_lo: f64,
    /// Recent correlation concentration (normalized per the params).
    pub omega_c: f64,
    /// Recent decorrelation concentration.
    pub omega_d: f64,
}

impl ThresholdState {
    pub fn initial(params: &PlasticityParams) -> Self {
        ThresholdState {
            theta_hi: params.initial_theta_hi,
            theta_lo: params.initial_theta_lo,
            omega_c: 0.0,
            omega_d: 0.0,
        }
    }
}

/// Correlation event for one synapse given the delayed presynaptic output
/// and the current postsynaptic output.
#[inline]
pub fn correlation(pre: f64, post: f64, th: &ThresholdState, params: &PlasticityParams) -> f64 {
    let product = pre * post;
    match params.mode {
        CorrelationMode::Plus => {
            if product > th.theta_hi {
                1.0
            } else {
                0.0
            }
        }
        CorrelationMode::Full => {
            if product > th.theta_hi {
                params.alpha
            } else if product < th.theta_lo {
                -params.beta
            } else {
                0.0
            }
        }
    }
}

/// Correlation matrix `Theta` over all synapses.
pub fn detect_correlations(
    v_pre_delayed: &[f64],
    v_post: &[f64],
    th: &ThresholdState,
    params: &PlasticityParams,
) -> Matrix {
    let mut theta = Matrix::zeros(v_pre_delayed.len(), v_post.len());
    for (j, &pre) in v_pre_delayed.iter().enumerate() {
        for (i, &post) in v_post.iter().enumerate() {
            theta.set(j, i, correlation(pre, post, th, params));
        }
    }
    theta
}

/// One trace step: decay, add the correlation event, keep non-negative.
#[inline]
pub fn trace_step(e: f64, theta: f64, decay: f64) -> f64 {
    (e * decay + theta).max(0.0)
}

pub fn update_traces(e: &Matrix, theta: &Matrix, params: &PlasticityParams, dt: f64) -> Result<Matrix> {
    e.ensure_shape(theta, "traces vs correlations")?;
    let decay = params.decays(dt).trace;
    let data = e
        .as_slice()
        .iter()
        .zip(theta.as_slice())
        .map(|(&ej, &tj)| trace_step(ej, tj, decay))
        .collect();
    Matrix::from_vec(e.rows(), e.cols(), data)
}

/// `m <- m exp(-dt / tau_m) + lambda r + b dt`, with `r` the one-step reward.
pub fn update_modulation(ms: ModulationState, r: f64, params: &PlasticityParams, dt: f64) -> ModulationState {
    ModulationState {
        m: modulation_step(ms.m, r, params, params.decays(dt).modulation, dt),
    }
}

#[inline]
pub fn modulation_step(m: f64, r: f64, params: &PlasticityParams, decay: f64, dt: f64) -> f64 {
    m * decay + params.learning_rate * r + params.baseline_modulation * dt
}

/// Single-component rule: `w <- clamp(w + m E dt, 0, 1)`.
pub fn apply_single_component(w: &Matrix, m: f64, e: &Matrix, dt: f64) -> Result<Matrix> {
    w.ensure_shape(e, "weights vs traces")?;
    let data = w
        .as_slice()
        .iter()
        .zip(e.as_slice())
        .map(|(&wj, &ej)| single_step(wj, m, ej, dt))
        .collect();
    Matrix::from_vec(w.rows(), w.cols(), data)
}

#[inline]
pub fn single_step(w: f64, m: f64, e: f64, dt: f64) -> f64 {
    (w + m * e * dt).clamp(0.0, 1.0)
}

#[inline]
pub fn short_term_step(st: f64, m: f64, e: f64, decay: f64, dt: f64) -> f64 {
    (st * decay + m * e * dt).clamp(-1.0, 1.0)
}

/// Short-term rule: `w_st <- clamp(w_st exp(-dt / tau_st) + m E dt, -1, 1)`.
pub fn apply_short_term(
    wm: &WeightMatrix,
    m: f64,
    e: &Matrix,
    params: &PlasticityParams,
    dt: f64,
) -> Result<WeightMatrix> {
    wm.st.ensure_shape(e, "short-term weights vs traces")?;
    let decay = params.decays(dt).short_term;
    let data = wm
        .st
        .as_slice()
        .iter()
        .zip(e.as_slice())
        .map(|(&s, &ej)| short_term_step(s, m, ej, decay, dt))
        .collect();
    Ok(WeightMatrix {
        st: Matrix::from_vec(wm.st.rows(), wm.st.cols(), data)?,
        lt: wm.lt.clone(),
    })
}

/// Long-term update for one synapse. Grows while `st > psi`; with
/// `unlearning`, shrinks while `st < -psi`. Kept inside `[0, 1]`.
#[inline]
pub fn long_term_step(st: f64, lt: f64, psi: f64, step: f64, unlearning: bool) -> f64 {
    if st > psi {
        (lt + step).min(1.0)
    } else if unlearning && st < -psi {
        (lt - step).max(0.0)
    } else {
        lt
    }
}

pub fn consolidate(wm: &WeightMatrix, params: &PlasticityParams, dt: f64) -> WeightMatrix {
    map_long_term(wm, params, dt, false)
}

/// Consolidation plus its mirror image for strongly negative short-term weights.
pub fn unconsolidate(wm: &WeightMatrix, params: &PlasticityParams, dt: f64) -> WeightMatrix {
    let step = params.consolidation_rate * dt;
    let psi = params.consolidation_threshold;
    let mut out = wm.clone();
    for (l, &s) in out.lt.as_mut_slice().iter_mut().zip(wm.st.as_slice()) {
        if s < -psi {
            *l = (*l - step).max(0.0);
        }
    }
    out
}

fn map_long_term(wm: &WeightMatrix, params: &PlasticityParams, dt: f64, unlearning: bool) -> WeightMatrix {
    let step = params.consolidation_rate * dt;
    let psi = params.consolidation_threshold;
    let mut out = wm.clone();
    for (l, &s) in out.lt.as_mut_slice().iter_mut().zip(wm.st.as_slice()) {
        *l = long_term_step(s, *l, psi, step, unlearning);
    }
    out
}

/// Recent correlation and decorrelation counts, one entry per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationWindow {
    capacity: usize,
    positive: VecDeque<u32>,
    negative: VecDeque<u32>,
    sum_positive: u64,
    sum_negative: u64,
    leaky_c: f64,
    leaky_d: f64,
}

impl ConcentrationWindow {
    pub fn new(params: &PlasticityParams, dt: f64) -> Self {
        let capacity = ((params.correlation_window / dt).round() as usize).max(1);
        ConcentrationWindow {
            capacity,
            positive: VecDeque::with_capacity(capacity),
            negative: VecDeque::with_capacity(capacity),
            sum_positive: 0,
            sum_negative: 0,
            leaky_c: 0.0,
            leaky_d: 0.0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Records one step's counts of correlating and decorrelating synapses.
    pub fn push(&mut self, correlations: u32, decorrelations: u32, decay: f64) {
        if self.positive.len() == self.capacity {
            self.sum_positive -= u64::from(self.positive.pop_front().unwrap_or(0));
            self.sum_negative -= u64::from(self.negative.pop_front().unwrap_or(0));
        }
        self.positive.push_back(correlations);
        self.negative.push_back(decorrelations);
        self.sum_positive += u64::from(correlations);
        self.sum_negative += u64::from(decorrelations);
        // Scaled so a constant count c settles at c, as the window form does.
        self.leaky_c = self.leaky_c * decay + (1.0 - decay) * f64::from(correlations);
        self.leaky_d = self.leaky_d * decay + (1.0 - decay) * f64::from(decorrelations);
    }

    pub fn sums(&self) -> (u64, u64) {
        (self.sum_positive, self.sum_negative)
    }
}

/// Recent concentrations `(omega_c, omega_d)` = `dt * sum(window) / window_s`,
/// divided by the synapse count under per-synapse normalization.
pub fn measure_concentration(
    window: &ConcentrationWindow,
    params: &PlasticityParams,
    dt: f64,
    n_synapses: usize,
) -> (f64, f64) {
    let (c, d) = match params.estimator {
        ConcentrationEstimator::Window => (
            dt * window.sum_positive as f64 / params.correlation_window,
            dt * window.sum_negative as f64 / params.correlation_window,
        ),
        ConcentrationEstimator::Leaky => (window.leaky_c, window.leaky_d),
    };
    match params.normalization {
        ConcentrationNorm::Total => (c, d),
        ConcentrationNorm::PerSynapse => {
            let n = n_synapses.max(1) as f64;
            (c / n, d / n)
        }
    }
}

/// Moves the thresholds by `eta dt` when the concentrations leave the band
/// `[mu / 2, 2 mu]`: the high threshold follows correlations, the low one
/// moves against decorrelations.
pub fn adapt_thresholds(th: ThresholdState, params: &PlasticityParams, dt: f64) -> ThresholdState {
    let step = params.threshold_rate * dt;
    let mu = params.target_rate;
    let mut next = th;
    if th.omega_c > 2.0 * mu {
        next.theta_hi += step;
    } else if th.omega_c < mu / 2.0 {
        next.theta_hi -= step;
    }
    if params.mode == CorrelationMode::Full {
        if th.omega_d > 2.0 * mu {
            next.theta_lo -= step;
        } else if th.omega_d < mu / 2.0 {
            next.theta_lo += step;
        }
        if next.theta_lo >= next.theta_hi {
            next.theta_lo = th.theta_lo.min(next.theta_hi - step);
        }
    }
    next
}
