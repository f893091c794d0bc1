//! Identifiers, licenses, bids and bidder profiles shared by every mechanism.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agents::ValueDistribution;
use crate::error::{Error, Result};
use crate::money::{Money, Share};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(
    /// Opaque bidder identifier. Mechanisms never inspect its contents.
    BidderId
);
string_id!(
    /// Opaque license identifier.
    LicenseId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LicenseGroup {
    A,
    B,
    C,
    #[default]
    #[serde(rename = "none")]
    Ungrouped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct License {
    pub id: LicenseId,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub group: LicenseGroup,
    /// Price floor for money-bid formats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservation: Option<Money>,
    /// Floor for the share auction. Unset means a sole bidder pays share zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservation_share: Option<Share>,
}

impl License {
    pub fn new(id: impl Into<LicenseId>) -> Self {
        License {
            id: id.into(),
            label: String::new(),
            group: LicenseGroup::Ungrouped,
            reservation: None,
            reservation_share: None,
        }
    }

    pub fn with_reservation(mut self, reservation: Money) -> Self {
        self.reservation = Some(reservation);
        self
    }

    pub fn with_reservation_share(mut self, share: Share) -> Self {
        self.reservation_share = Some(share);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>, group: LicenseGroup) -> Self {
        self.label = label.into();
        self.group = group;
        self
    }

    pub(crate) fn floor(&self) -> Money {
        self.reservation.unwrap_or(Money::ZERO)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceBid {
    pub bidder: BidderId,
    pub license: LicenseId,
    pub amount: Money,
}

impl PriceBid {
    pub fn new(bidder: impl Into<BidderId>, license: impl Into<LicenseId>, amount: Money) -> Self {
        PriceBid {
            bidder: bidder.into(),
            license: license.into(),
            amount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareBid {
    pub bidder: BidderId,
    pub license: LicenseId,
    pub share: Share,
}

impl ShareBid {
    pub fn new(bidder: impl Into<BidderId>, license: impl Into<LicenseId>, share: Share) -> Self {
        ShareBid {
            bidder: bidder.into(),
            license: license.into(),
            share,
        }
    }
}

/// Non-price qualities scored by the weighted sealed-bid format, each on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityAttributes {
    pub rollout_speed: f64,
    pub rural_coverage: f64,
    pub indigenous_content: f64,
}

impl QualityAttributes {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rollout_speed", self.rollout_speed),
            ("rural_coverage", self.rural_coverage),
            ("indigenous_content", self.indigenous_content),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Where a bidder's value for a license comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueModel {
    Point(Money),
    Distribution(ValueDistribution),
    /// Noisy private signal of a value common to all bidders.
    CommonSignal {
        noise_sd: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    #[default]
    Truthful,
    Shaded {
        gamma: f64,
    },
    /// Symmetric equilibrium of first-price bidding under uniform values.
    EquilibriumFpsb,
    BudgetConstrained,
    CertaintyEquivalent,
    CommonValueNaive,
    CommonValueCorrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderProfile {
    pub id: BidderId,
    pub value: ValueModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Money>,
    /// Constant absolute risk aversion; zero is risk-neutral.
    #[serde(default)]
    pub risk_coefficient: f64,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes: Option<QualityAttributes>,
}

impl BidderProfile {
    pub fn new(id: impl Into<BidderId>, value: ValueModel) -> Self {
        BidderProfile {
            id: id.into(),
            value,
            budget: None,
            risk_coefficient: 0.0,
            strategy: Strategy::Truthful,
            attributes: None,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_budget(mut self, budget: Money) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_risk(mut self, a: f64) -> Self {
        self.risk_coefficient = a;
        self
    }

    pub fn with_attributes(mut self, attributes: QualityAttributes) -> Self {
        self.attributes = Some(attributes);
        self
    }

    /// Collects every problem with this profile rather than stopping at the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let who = &self.id;
        if !(self.risk_coefficient.is_finite() && self.risk_coefficient >= 0.0) {
            out.push(format!("bidders[{who}].risk_coefficient must be >= 0"));
        }
        match &self.value {
            ValueModel::Point(_) => {}
            ValueModel::Distribution(d) => {
                if let Err(e) = d.validate() {
                    out.push(format!("bidders[{who}].value: {e}"));
                }
            }
            ValueModel::CommonSignal { noise_sd } => {
                if !(noise_sd.is_finite() && *noise_sd >= 0.0) {
                    out.push(format!(
                        "bidders[{who}].value.common_signal.noise_sd must be >= 0"
                    ));
                }
            }
        }
        if let Strategy::Shaded { gamma } = self.strategy {
            if !(0.0..1.0).contains(&gamma) {
                out.push(format!(
                    "bidders[{who}].strategy.shaded.gamma must lie in [0, 1)"
                ));
            }
        }
        let needs_signal = matches!(
            self.strategy,
            Strategy::CommonValueNaive | Strategy::CommonValueCorrected
        );
        let has_signal = matches!(self.value, ValueModel::CommonSignal { .. });
        if needs_signal && !has_signal {
            out.push(format!(
                "bidders[{who}]: common-value strategies need a common_signal value model"
            ));
        }
        if has_signal
            && !needs_signal
            && !matches!(self.strategy, Strategy::Truthful | Strategy::Shaded { .. })
        {
            out.push(format!(
                "bidders[{who}]: strategy cannot be applied to a common_signal value model"
            ));
        }
        if matches!(self.strategy, Strategy::BudgetConstrained) && self.budget.is_none() {
            out.push(format!(
                "bidders[{who}].budget is required by the budget_constrained strategy"
            ));
        }
        if let Some(attrs) = &self.attributes {
            if let Err(e) = attrs.validate() {
                out.push(format!("bidders[{who}].attributes: {e}"));
            }
        }
        out
    }
}
