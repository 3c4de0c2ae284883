//! Rate-based feed-forward layer: neural states, noisy tanh outputs, the
//! two-component weight composition and winner-take-all action selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n_inputs: usize,
    pub n_outputs: usize,
    /// Neural gain applied inside the tanh.
    pub gain: f64,
    /// Standard deviation of the per-neuron Gaussian noise.
    pub noise_std: f64,
    /// Sampling step in seconds.
    pub dt: f64,
    /// Presynaptic-to-postsynaptic delay in seconds; one sampling step.
    pub propagation_time: f64,
    /// Current injected into the input neuron of each active stimulus.
    pub stimulus_current: f64,
    /// Current fed back to the output neuron driving the running action.
    pub feedback_current: f64,
    /// Action duration range in seconds.
    pub action_duration: (f64, f64),
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            n_inputs: 300,
            n_outputs: 30,
            gain: 0.5,
            noise_std: 0.02,
            dt: 0.1,
            propagation_time: 0.1,
            stimulus_current: 10.0,
            feedback_current: 0.5,
            action_duration: (1.0, 2.0),
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_inputs == 0 {
            return Err(Error::config("n_inputs", "must be at least 1"));
        }
        if self.n_outputs == 0 {
            return Err(Error::config("n_outputs", "must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be positive"));
        }
        if self.propagation_time != self.dt {
            return Err(Error::config(
                "propagation_time",
                "must equal dt (one-step propagation)",
            ));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::config("noise_std", "must be non-negative"));
        }
        let (lo, hi) = self.action_duration;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::config("action_duration", "need 0 < min <= max"));
        }
        Ok(())
    }
}

/// Short-term and long-term weight components of every synapse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub st: Matrix,
    pub lt: Matrix,
}

impl WeightMatrix {
    pub fn zeros(n_inputs: usize, n_outputs: usize) -> Self {
        WeightMatrix {
            st: Matrix::zeros(n_inputs, n_outputs),
            lt: Matrix::zeros(n_inputs, n_outputs),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.st.shape()
    }

    /// Transmission weight of one synapse.
    #[inline]
    pub fn total(&self, j: usize, i: usize) -> f64 {
        compose(self.st.get(j, i), self.lt.get(j, i))
    }
}

#[inline]
pub fn compose(st: f64, lt: f64) -> f64 {
    (st + lt).clamp(0.0, 1.0)
}

/// Transmission weights `clamp(w_st + w_lt, 0, 1)`.
pub fn effective_weights(wm: &WeightMatrix) -> Result<Matrix> {
    wm.st.ensure_shape(&wm.lt, "short-term vs long-term weights")?;
    let data = wm
        .st
        .as_slice()
        .iter()
        .zip(wm.lt.as_slice())
        .map(|(&s, &l)| compose(s, l))
        .collect();
    Matrix::from_vec(wm.st.rows(), wm.st.cols(), data)
}

/// Neural states `u_i = sum_j W_ji v_j + I_i`.
pub fn compute_states(w: &Matrix, currents: &[f64], v_pre: &[f64]) -> Result<Vec<f64>> {
    if v_pre.len() != w.rows() || currents.len() != w.cols() {
        return Err(Error::Shape(format!(
            "weights {:?}, presynaptic {}, currents {}",
            w.shape(),
            v_pre.len(),
            currents.len()
        )));
    }
    let mut u = currents.to_vec();
    for (j, &vj) in v_pre.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        for (ui, &wji) in u.iter_mut().zip(w.row(j)) {
            *ui += wji * vj;
        }
    }
    Ok(u)
}

/// Output of one neuron: `tanh(gain u) + noise` for `u >= 0`, noise otherwise.
#[inline]
pub fn activation(u: f64, gain: f64, noise: f64) -> f64 {
    if u >= 0.0 {
        (gain * u).tanh() + noise
    } else {
        noise
    }
}

/// Outputs for a vector of states; one fresh noise draw per neuron.
pub fn compute_outputs(u: &[f64], params: &NetworkParams, rng: &mut StreamRng) -> Vec<f64> {
    u.iter()
        .map(|&ui| activation(ui, params.gain, rng.gaussian(params.noise_std)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionState {
    pub current: Option<usize>,
    pub ends_at: f64,
}

impl Default for ActionState {
    fn default() -> Self {
        ActionState {
            current: None,
            ends_at: 0.0,
        }
    }
}

impl ActionState {
    pub fn is_running(&self, t: f64) -> bool {
        self.current.is_some() && t < self.ends_at
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

/// Keeps a running action; otherwise starts the most active output for a
/// U(min, max) duration. The flag reports whether a new action started.
pub fn select_action(
    v: &[f64],
    action: ActionState,
    t: f64,
    duration: (f64, f64),
    rng: &mut StreamRng,
) -> (ActionState, bool) {
    if action.is_running(t) {
        return (action, false);
    }
    match argmax(v) {
        Some(winner) => {
            let length = rng.uniform(duration.0, duration.1);
            (
                ActionState {
                    current: Some(winner),
                    ends_at: t + length,
                },
                true,
            )
        }
        None => (action, false),
    }
}

/// Feedback currents for the output layer: only the output whose action is
/// still running at `t` receives the feedback current.
pub fn feedback_currents(action: &ActionState, t: f64, current: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    if let (Some(a), true) = (action.current, action.is_running(t)) {
        out[a] = current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_stream, Stream};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn single(st: f64, lt: f64) -> WeightMatrix {
        WeightMatrix {
            st: Matrix::filled(1, 1, st),
            lt: Matrix::filled(1, 1, lt),
        }
    }

    #[test]
    fn composition_sums_and_clamps() {
        assert_abs_diff_eq!(effective_weights(&single(0.3, 0.5)).unwrap().get(0, 0), 0.8, epsilon = 1e-15);
        assert_eq!(effective_weights(&single(-0.2, 0.1)).unwrap().get(0, 0), 0.0);
        assert_eq!(effective_weights(&single(0.4, 1.0)).unwrap().get(0, 0), 1.0);
    }

    #[test]
    fn composition_rejects_mismatched_shapes() {
        let wm = WeightMatrix {
            st: Matrix::zeros(2, 3),
            lt: Matrix::zeros(3, 2),
        };
        assert!(matches!(effective_weights(&wm), Err(Error::Shape(_))));
    }

    #[test]
    fn states_examples() {
        let w = Matrix::zeros(3, 2);
        let u = compute_states(&w, &[10.0, 0.0], &[0.0, 0.3, 0.9]).unwrap();
        assert_eq!(u, vec![10.0, 0.0]);

        let w = Matrix::filled(1, 1, 1.0);
        assert_eq!(compute_states(&w, &[0.0], &[0.46]).unwrap(), vec![0.46]);

        let w = Matrix::filled(2, 1, 0.5);
        assert_eq!(compute_states(&w, &[0.5], &[1.0, 1.0]).unwrap(), vec![1.5]);

        assert!(compute_states(&w, &[0.5], &[1.0]).is_err());
    }

    #[test]
    fn outputs_without_noise() {
        let mut rng = rng_stream(0, Stream::NeuronNoise);
        let quiet = NetworkParams {
            noise_std: 0.0,
            ..NetworkParams::default()
        };
        let v = compute_outputs(&[10.0, -3.0], &quiet, &mut rng);
        assert_abs_diff_eq!(v[0], 0.999_909_2, epsilon = 1e-6);
        assert_eq!(v[1], 0.0);

        let low_gain = NetworkParams { gain: 0.1, ..quiet };
        let v = compute_outputs(&[0.46], &low_gain, &mut rng);
        assert_abs_diff_eq!(v[0], 0.045_968, epsilon = 1e-5);
    }

    #[test]
    fn noise_is_drawn_in_both_branches() {
        let p = NetworkParams::default();
        let mut a = rng_stream(5, Stream::NeuronNoise);
        let mut b = rng_stream(5, Stream::NeuronNoise);
        let v = compute_outputs(&[-1.0, 2.0], &p, &mut a);
        let n0 = b.gaussian(p.noise_std);
        let n1 = b.gaussian(p.noise_std);
        assert_eq!(v[0], n0);
        assert_eq!(v[1], (p.gain * 2.0).tanh() + n1);
    }

    #[test]
    fn action_selection_examples() {
        let mut rng = rng_stream(1, Stream::ActionDurations);
        let (a, started) = select_action(&[0.1, 0.5, 0.2], ActionState::default(), 0.0, (1.0, 2.0), &mut rng);
        assert!(started);
        assert_eq!(a.current, Some(1));
        assert!(a.ends_at >= 1.0 && a.ends_at < 2.0);

        let running = ActionState {
            current: Some(2),
            ends_at: 5.3,
        };
        let (a, started) = select_action(&[9.0, 0.0, 0.0], running, 5.0, (1.0, 2.0), &mut rng);
        assert!(!started);
        assert_eq!(a, running);

        let (a, _) = select_action(&[0.4, 0.4], ActionState::default(), 0.0, (1.0, 2.0), &mut rng);
        assert_eq!(a.current, Some(0));
    }

    #[test]
    fn feedback_reaches_only_the_winner() {
        let mut out = vec![9.0; 4];
        let a = ActionState {
            current: Some(2),
            ends_at: 3.0,
        };
        feedback_currents(&a, 2.9, 0.5, &mut out);
        assert_eq!(out, vec![0.0, 0.0, 0.5, 0.0]);
        feedback_currents(&a, 3.0, 0.5, &mut out);
        assert_eq!(out, vec![0.0; 4]);
    }

    proptest! {
        #[test]
        fn effective_weight_in_unit_range(st in -1.0f64..=1.0, lt in 0.0f64..=1.0) {
            let w = effective_weights(&single(st, lt)).unwrap().get(0, 0);
            prop_assert!((0.0..=1.0).contains(&w));
        }

        #[test]
        fn quiet_outputs_in_tanh_range(u in -50.0f64..50.0, gain in 0.01f64..2.0) {
            let v = activation(u, gain, 0.0);
            if u < 0.0 {
                prop_assert_eq!(v, 0.0);
            } else {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn actions_change_only_after_deadline(v in proptest::collection::vec(-1.0f64..1.0, 1..8), t in 0.0f64..10.0, ends in 0.0f64..10.0) {
            let mut rng = rng_stream(2, Stream::ActionDurations);
            let prior = ActionState { current: Some(0), ends_at: ends };
            let (next, started) = select_action(&v, prior, t, (1.0, 2.0), &mut rng);
            if t < ends {
                prop_assert!(!started);
                prop_assert_eq!(next, prior);
            } else {
                prop_assert!(started);
                prop_assert!(next.ends_at >= t + 1.0 && next.ends_at < t + 2.0);
            }
        }
    }
}
