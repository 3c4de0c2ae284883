pub mod drift;
pub mod metrics;
pub mod presets;
pub mod suite;
pub mod trial;

pub use drift::{run_drift, DriftConfig, DriftRecord, Phase};
pub use metrics::{reward_rate, weight_summary, MetricsRecord, MetricsSeries, WeightSummary};
pub use presets::{Preset, Study};
pub use suite::{aggregate, run_suite, Aggregate, Stats, SuiteOutput};
pub use trial::{run_trial, Rule, Simulation, TrialConfig, TrialOutput};
