//! Named experiment setups at full and mini scale.

use serde::{Deserialize, Serialize};

use crate::environment::{scenario_catalog, EnvironmentParams};
use crate::error::Result;
use crate::experiments::trial::{Rule, TrialConfig};
use crate::network::NetworkParams;
use crate::plasticity::PlasticityParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 300 inputs, 30 outputs, 24 h scenarios.
    Full,
    /// 30 inputs, 10 outputs, 2 h scenarios, one-hour short-term memory.
    Mini,
}

/// Which study a preset configures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    /// Three scenarios, then the first one revisited.
    Run,
    /// The first scenario held for an extended period.
    Stability,
    /// The two checkerboard scenarios with a low gain and slow short-term decay.
    Checker,
}

pub const MINI_TAU_SHORT_TERM: f64 = 3600.0;
/// Baseline modulation at mini scale. The table value depresses a trace
/// faster than a reward following it can potentiate, so nothing is learned.
pub const MINI_BASELINE_MODULATION: f64 = -0.006;
pub const MINI_STABILITY_HOURS: f64 = 24.0;
pub const FULL_STABILITY_HOURS: f64 = 288.0;
pub const CHECKER_GAIN: f64 = 0.1;
pub const CHECKER_TAU_SCALE: f64 = 3.0;

impl Preset {
    pub fn network(self) -> NetworkParams {
        match self {
            Preset::Full => NetworkParams::default(),
            Preset::Mini => NetworkParams {
                n_inputs: 30,
                n_outputs: 10,
                ..NetworkParams::default()
            },
        }
    }

    pub fn plasticity(self, rule: Rule) -> PlasticityParams {
        let base = PlasticityParams {
            mode: rule.default_mode(),
            ..PlasticityParams::default()
        };
        match self {
            Preset::Full => base,
            Preset::Mini => PlasticityParams {
                tau_short_term: MINI_TAU_SHORT_TERM,
                baseline_modulation: MINI_BASELINE_MODULATION,
                ..base
            },
        }
    }

    pub fn scenario_names(self, study: Study) -> Vec<&'static str> {
        match (self, study) {
            (Preset::Full, Study::Run) => vec!["S1", "S2", "S3", "S1"],
            (Preset::Mini, Study::Run) => vec!["MINI_S1", "MINI_S2", "MINI_S1"],
            (Preset::Full, Study::Stability) => vec!["S1"],
            (Preset::Mini, Study::Stability) => vec!["MINI_S1"],
            (Preset::Full, Study::Checker) => vec!["CHECKER_A", "CHECKER_B"],
            (Preset::Mini, Study::Checker) => vec!["MINI_CHECKER_A", "MINI_CHECKER_B"],
        }
    }

    /// The trial configuration of a study with every parameter at its default.
    pub fn trial(self, study: Study, rule: Rule, seed: u64) -> Result<TrialConfig> {
        let mut network = self.network();
        let mut plasticity = self.plasticity(rule);
        let mut scenarios = self
            .scenario_names(study)
            .into_iter()
            .map(scenario_catalog)
            .collect::<Result<Vec<_>>>()?;
        match study {
            Study::Run => {}
            Study::Stability => {
                let hours = match self {
                    Preset::Full => FULL_STABILITY_HOURS,
                    Preset::Mini => MINI_STABILITY_HOURS,
                };
                scenarios[0].duration = hours * 3600.0;
            }
            Study::Checker => {
                network.n_outputs = 10;
                network.gain = CHECKER_GAIN;
                plasticity.tau_short_term *= CHECKER_TAU_SCALE;
            }
        }
        Ok(TrialConfig {
            network,
            plasticity,
            environment: EnvironmentParams::default(),
            rule,
            unlearning: false,
            scenarios,
            seed,
            snapshot_s: 60.0,
        })
    }
}
