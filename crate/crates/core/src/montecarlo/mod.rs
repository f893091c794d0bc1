//! Scenario definition, repeated trials and metric aggregation.

mod scenario;
mod trials;

pub use scenario::{
    MechanismConfig, MetricsConfig, RevenueStream, Scenario, ScoredConfig, ShareConfig,
    ValueSetting, SCENARIO_VERSION,
};
pub use trials::{
    run_trials, share_payment_component, winner_surplus, LicenseRecord, MetricsSummary, RunOptions,
    Settlement, TrialRecord, TrialReport,
};
