use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::agents::{present_value, ValueDistribution};
use crate::domain::{BidderProfile, License, Strategy, ValueModel};
use crate::error::{Result, ValidationError};
use crate::mechanisms::{MechanismKind, SamrConfig, ScoreWeights};
use crate::money::Money;

pub const SCENARIO_VERSION: u32 = 1;

/// A repeatable experiment: one mechanism, its licenses and bidders, and how
/// many seeded trials to run. Parsed from TOML; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub mechanism: MechanismKind,
    pub licenses: Vec<License>,
    pub bidders: Vec<BidderProfile>,
    #[serde(default)]
    pub config: MechanismConfig,
    pub trials: u64,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samr: Option<SamrConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scored: Option<ScoredConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub share: Option<ShareConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoredConfig {
    pub weights: ScoreWeights,
}

/// Terms of the share auction: the escrowed valuation per license, the
/// license's revenue stream, and the hurdle rate bidders discount it at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareConfig {
    pub valuation: Money,
    pub revenues: RevenueStream,
    #[serde(default)]
    pub discount_rate: f64,
}

impl ShareConfig {
    pub fn revenue_periods(&self) -> Vec<Money> {
        self.revenues.periods()
    }

    pub fn pv_revenues(&self) -> f64 {
        present_value(&self.revenue_periods(), self.discount_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RevenueStream {
    Flat { amount: Money, periods: u32 },
    Periods(Vec<Money>),
}

impl RevenueStream {
    pub fn periods(&self) -> Vec<Money> {
        match self {
            RevenueStream::Flat { amount, periods } => vec![*amount; *periods as usize],
            RevenueStream::Periods(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default)]
    pub values: ValueSetting,
    /// Total network roll-out cost per license, for the up-front burden ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rollout_cost: Option<Money>,
}

/// How realized values are generated for ex-post metrics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSetting {
    /// Each bidder's drawn value is its realized value.
    #[default]
    Private,
    /// One value per license drawn from this distribution, observed through
    /// noisy signals, and realized by whoever wins.
    Common(ValueDistribution),
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> std::result::Result<Scenario, ValidationError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ValidationError {
            violations: vec![e.message().to_string() + &span_note(text, e.span())],
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn with_mechanism(&self, mechanism: MechanismKind) -> Scenario {
        Scenario {
            mechanism,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> std::result::Result<(), ValidationError> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.version != SCENARIO_VERSION {
            out.push(format!(
                "version: expected {SCENARIO_VERSION}, found {}",
                self.version
            ));
        }
        if self.trials == 0 {
            out.push("trials: must be >= 1".to_string());
        }
        if self.licenses.is_empty() {
            out.push("licenses: at least one license is required".to_string());
        }
        let mut ids = HashSet::new();
        for lic in &self.licenses {
            if !ids.insert(&lic.id) {
                out.push(format!("licenses: duplicate id {}", lic.id));
            }
        }
        let mut ids = HashSet::new();
        for b in &self.bidders {
            if !ids.insert(&b.id) {
                out.push(format!("bidders: duplicate id {}", b.id));
            }
            out.extend(b.violations());
            if matches!(b.strategy, Strategy::CertaintyEquivalent)
                && matches!(b.value, ValueModel::CommonSignal { .. })
            {
                out.push(format!(
                    "bidders[{}]: certainty_equivalent needs a point or distribution value",
                    b.id
                ));
            }
            if matches!(b.strategy, Strategy::EquilibriumFpsb) && self.bidders.len() < 2 {
                out.push(format!(
                    "bidders[{}]: equilibrium_fpsb needs at least 2 bidders",
                    b.id
                ));
            }
            if matches!(b.value, ValueModel::CommonSignal { .. })
                && self.metrics.values == ValueSetting::Private
            {
                out.push(format!(
                    "bidders[{}]: common_signal values need metrics.values = common",
                    b.id
                ));
            }
        }
        if let ValueSetting::Common(d) = &self.metrics.values {
            if let Err(e) = d.validate() {
                out.push(format!("metrics.values.common: {e}"));
            }
        }
        if let Some(samr) = &self.config.samr {
            out.extend(samr.violations());
        }
        if let Some(share) = &self.config.share {
            if !(share.discount_rate.is_finite() && share.discount_rate >= 0.0) {
                out.push("config.share.discount_rate: must be >= 0".to_string());
            }
            if share.revenue_periods().is_empty() {
                out.push("config.share.revenues: at least one period is required".to_string());
            }
        }
        match self.mechanism {
            MechanismKind::Samr if self.config.samr.is_none() => {
                out.push("config.samr: required when mechanism = \"samr\"".to_string())
            }
            MechanismKind::Scored => {
                if self.config.scored.is_none() {
                    out.push("config.scored: required when mechanism = \"scored\"".to_string());
                }
                for b in self.bidders.iter().filter(|b| b.attributes.is_none()) {
                    out.push(format!(
                        "bidders[{}].attributes: required when mechanism = \"scored\"",
                        b.id
                    ));
                }
            }
            MechanismKind::Share => match &self.config.share {
                None => out.push("config.share: required when mechanism = \"share\"".to_string()),
                Some(share) if share.pv_revenues() <= 0.0 => {
                    out.push("config.share.revenues: present value must be positive".to_string())
                }
                Some(_) => {}
            },
            _ => {}
        }
        out
    }

    pub(crate) fn check(&self) -> Result<()> {
        self.validate().map_err(Into::into)
    }
}

fn span_note(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span else {
        return String::new();
    };
    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
    format!(" (line {line})")
}
