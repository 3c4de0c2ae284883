//! Browser bindings: the scalar drift and unlearning studies, and a mini
//! network that can be stepped and inspected as a weight heatmap.

use htp_core::experiments::{run_drift, DriftConfig, DriftRecord, Preset, Rule, Simulation, Study};
use wasm_bindgen::prelude::*;

fn flatten(rows: &[DriftRecord]) -> Vec<f64> {
    rows.iter()
        .flat_map(|r| [r.update, r.single, r.short_term, r.long_term])
        .collect()
}

fn scalar_study(cfg: DriftConfig) -> htp_core::Result<Vec<f64>> {
    run_drift(&cfg).map(|rows| flatten(&rows))
}

fn js(e: htp_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Drift study rows flattened as `[update, single, st, lt]` per episode.
#[wasm_bindgen]
pub fn drift(seed: u32) -> Result<Vec<f64>, JsError> {
    scalar_study(DriftConfig::drift(seed.into())).map_err(js)
}

/// Unlearning demo rows, same layout as [`drift`].
#[wasm_bindgen]
pub fn unlearning(seed: u32) -> Result<Vec<f64>, JsError> {
    scalar_study(DriftConfig::unlearning(seed.into())).map_err(js)
}

/// A mini-scale network running the three-scenario study.
#[wasm_bindgen]
pub struct MiniNetwork {
    sim: Simulation,
}

impl MiniNetwork {
    fn create(htp: bool, seed: u64) -> htp_core::Result<MiniNetwork> {
        let rule = if htp { Rule::Htp } else { Rule::Rchp };
        let cfg = Preset::Mini.trial(Study::Run, rule, seed)?;
        Ok(MiniNetwork {
            sim: Simulation::new(cfg)?,
        })
    }

    fn run_for(&mut self, seconds: f64) -> htp_core::Result<u32> {
        let steps = (seconds / self.sim.config.network.dt).round().max(0.0) as u64;
        let before = self.sim.rewards.len();
        for _ in 0..steps {
            if self.sim.step()?.is_none() {
                break;
            }
        }
        Ok((self.sim.rewards.len() - before) as u32)
    }
}

#[wasm_bindgen]
impl MiniNetwork {
    /// `htp = false` selects the single-component rule.
    #[wasm_bindgen(constructor)]
    pub fn new(htp: bool, seed: u32) -> Result<MiniNetwork, JsError> {
        Self::create(htp, seed.into()).map_err(js)
    }

    /// Simulates up to `seconds` more and returns the rewards delivered.
    pub fn advance(&mut self, seconds: f64) -> Result<u32, JsError> {
        self.run_for(seconds).map_err(js)
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn finished(&self) -> bool {
        self.sim.is_finished()
    }

    /// Name of the scenario being simulated.
    pub fn scenario(&self) -> String {
        let s = &self.sim.config.scenarios;
        s.get(self.sim.scenario_index)
            .or(s.last())
            .map(|x| x.id.clone())
            .unwrap_or_default()
    }

    pub fn inputs(&self) -> usize {
        self.sim.config.network.n_inputs
    }

    pub fn outputs(&self) -> usize {
        self.sim.config.network.n_outputs
    }

    /// Total weights, row-major with one row per input.
    pub fn total_weights(&self) -> Vec<f64> {
        let w = &self.sim.weights;
        w.st.as_slice()
            .iter()
            .zip(w.lt.as_slice())
            .map(|(&s, &l)| htp_core::network::compose(s, l))
            .collect()
    }

    pub fn long_term_weights(&self) -> Vec<f64> {
        self.sim.weights.lt.as_slice().to_vec()
    }

    pub fn total_rewards(&self) -> u32 {
        self.sim.rewards.len() as u32
    }
}
