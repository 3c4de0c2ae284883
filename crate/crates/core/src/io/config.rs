//! JSON run configuration. Every key is optional; absent keys keep the
//! value chosen by the preset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::{scenario_catalog, Pair, ScenarioSpec};
use crate::error::{Error, Result};
use crate::experiments::{Preset, Rule, Study, TrialConfig};
use crate::plasticity::{ConcentrationEstimator, ConcentrationNorm, CorrelationMode};

/// One scenario entry: either a catalog name, optionally with a new
/// duration, or an inline definition with 1-based labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `[stimulus, action]` pairs, 1-based.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rewarded_pairs: Option<Vec<[usize; 2]>>,
    /// 1-based stimulus labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stimulus_pool: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl ScenarioEntry {
    pub fn resolve(&self, index: usize) -> Result<ScenarioSpec> {
        let key = |field: &str| format!("scenarios.{index}.{field}");
        let inline = self.rewarded_pairs.is_some() || self.stimulus_pool.is_some();
        let mut spec = if inline {
            let pairs = self
                .rewarded_pairs
                .as_ref()
                .ok_or_else(|| Error::config(key("rewarded_pairs"), "required for an inline scenario"))?;
            let pool = self
                .stimulus_pool
                .as_ref()
                .ok_or_else(|| Error::config(key("stimulus_pool"), "required for an inline scenario"))?;
            let duration = self
                .duration_s
                .ok_or_else(|| Error::config(key("duration_s"), "required for an inline scenario"))?;
            let mut rewarded = std::collections::BTreeSet::new();
            for &[s, a] in pairs {
                if s == 0 || a == 0 {
                    return Err(Error::config(key("rewarded_pairs"), "labels start at 1"));
                }
                rewarded.insert(Pair::from_labels(s, a));
            }
            let stimulus_pool = pool
                .iter()
                .map(|&s| s.checked_sub(1))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::config(key("stimulus_pool"), "labels start at 1"))?;
            ScenarioSpec {
                id: self.name.clone().unwrap_or_else(|| format!("SCENARIO_{}", index + 1)),
                rewarded_pairs: rewarded,
                stimulus_pool,
                duration,
            }
        } else {
            let name = self
                .name
                .as_deref()
                .ok_or_else(|| Error::config(key("name"), "give a catalog name or an inline definition"))?;
            let mut spec = scenario_catalog(name)?;
            if let Some(d) = self.duration_s {
                spec.duration = d;
            }
            spec
        };
        if !(spec.duration >= 0.0 && spec.duration.is_finite()) {
            return Err(Error::config(key("duration_s"), "must be non-negative and finite"));
        }
        spec.id = spec.id.to_ascii_uppercase();
        Ok(spec)
    }
}

/// The configuration file schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub rule: Option<Rule>,
    pub unlearning: Option<bool>,
    pub scenarios: Option<Vec<ScenarioEntry>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub snapshot_s: Option<f64>,
    pub out_dir: Option<PathBuf>,

    pub n_inputs: Option<usize>,
    pub n_outputs: Option<usize>,
    pub gain: Option<f64>,
    pub noise_std: Option<f64>,
    pub dt: Option<f64>,
    pub propagation_time: Option<f64>,
    pub stimulus_current: Option<f64>,
    pub feedback_current: Option<f64>,
    pub action_duration: Option<(f64, f64)>,

    pub learning_rate: Option<f64>,
    pub baseline_modulation: Option<f64>,
    pub tau_modulation: Option<f64>,
    pub tau_trace: Option<f64>,
    pub tau_short_term: Option<f64>,
    pub consolidation_rate: Option<f64>,
    pub consolidation_threshold: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub target_rate: Option<f64>,
    pub threshold_rate: Option<f64>,
    pub correlation_window: Option<f64>,
    pub mode: Option<CorrelationMode>,
    pub estimator: Option<ConcentrationEstimator>,
    pub normalization: Option<ConcentrationNorm>,
    pub initial_theta_hi: Option<f64>,
    pub initial_theta_lo: Option<f64>,

    pub slots: Option<usize>,
    pub stimulus_probability: Option<f64>,
    pub stimulus_duration: Option<(f64, f64)>,
    pub reward_delay: Option<(f64, f64)>,
    pub reward_amplitude: Option<(f64, f64)>,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub rule: Option<Rule>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// A fully resolved run: the trial template plus run-level settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub preset: Preset,
    pub trial: TrialConfig,
    pub trials: usize,
    pub out_dir: PathBuf,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT_DIR: &str = "out";

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            Error::config(if key == "." { "<root>".into() } else { key }, e.inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Applies preset defaults, then this file, then `over`, for `study`.
    pub fn resolve(&self, study: Study, over: &Overrides) -> Result<ResolvedRun> {
        let preset = over.preset.or(self.preset).unwrap_or(Preset::Full);
        let rule = over.rule.or(self.rule).unwrap_or(Rule::Htp);
        let seed = over.seed.or(self.seed).unwrap_or(DEFAULT_SEED);
        let mut t = preset.trial(study, rule, seed)?;

        macro_rules! set {
            ($dst:expr, $($field:ident),+) => {
                $(if let Some(v) = self.$field { $dst.$field = v; })+
            };
        }
        set!(t.network, n_inputs, n_outputs, gain, noise_std, dt, propagation_time);
        set!(t.network, stimulus_current, feedback_current, action_duration);
        set!(t.plasticity, learning_rate, baseline_modulation, tau_modulation, tau_trace);
        set!(t.plasticity, tau_short_term, consolidation_rate, consolidation_threshold);
        set!(t.plasticity, alpha, beta, target_rate, threshold_rate, correlation_window);
        set!(t.plasticity, mode, estimator, normalization, initial_theta_hi, initial_theta_lo);
        set!(t.environment, slots, stimulus_probability, stimulus_duration, reward_delay);
        set!(t.environment, reward_amplitude);
        set!(t, unlearning, snapshot_s);

        if let Some(entries) = &self.scenarios {
            t.scenarios = entries
                .iter()
                .enumerate()
                .map(|(k, e)| e.resolve(k))
                .collect::<Result<_>>()?;
        }
        t.validate()?;

        let trials = over.trials.or(self.trials).unwrap_or(1);
        if trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        let out_dir = over
            .out_dir
            .clone()
            .or_else(|| self.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Ok(ResolvedRun {
            preset,
            trial: t,
            trials,
            out_dir,
        })
    }
}
