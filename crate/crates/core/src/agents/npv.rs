use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::{Money, Share};

/// Per-period revenue and cost forecast over the project life.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CashFlowForecast {
    pub revenues: Vec<Money>,
    pub costs: Vec<Money>,
    /// Hurdle rate per period.
    pub rate: f64,
}

impl CashFlowForecast {
    pub const DEFAULT_PERIODS: usize = 30;

    pub fn flat(periods: usize, revenue: Money, cost: Money, rate: f64) -> Self {
        CashFlowForecast {
            revenues: vec![revenue; periods],
            costs: vec![cost; periods],
            rate,
        }
    }

    pub fn periods(&self) -> usize {
        self.revenues.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.revenues.is_empty() {
            return Err(Error::param(
                "periods",
                "project life must be at least one period",
            ));
        }
        if self.costs.len() != self.revenues.len() {
            return Err(Error::param(
                "costs",
                format!(
                    "{} cost periods for {} revenue periods",
                    self.costs.len(),
                    self.revenues.len()
                ),
            ));
        }
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::param(
                "rate",
                format!("{} must be finite and >= 0", self.rate),
            ));
        }
        Ok(())
    }
}

/// `Σ_t flow_t / (1 + rate)^t` with periods numbered from 1.
pub fn present_value(flows: &[Money], rate: f64) -> f64 {
    let factor = 1.0 / (1.0 + rate);
    let mut discount = 1.0;
    flows
        .iter()
        .map(|f| {
            discount *= factor;
            f.to_f64() * discount
        })
        .sum()
}

/// Largest up-front fee that still meets the hurdle rate: `PV(revenues) − PV(costs)`, floored at zero.
pub fn max_license_fee(forecast: &CashFlowForecast) -> Result<Money> {
    forecast.validate()?;
    let surplus = present_value(&forecast.revenues, forecast.rate)
        - present_value(&forecast.costs, forecast.rate);
    Ok(Money::from_f64_clamped(surplus))
}

/// Largest revenue share the project can carry for its whole life:
/// `(PV(revenues) − PV(costs)) / PV(revenues)`, clamped to `[0, 1]`.
/// Zero means "do not bid".
pub fn share_backout(forecast: &CashFlowForecast) -> Result<Share> {
    forecast.validate()?;
    let pv_rev = present_value(&forecast.revenues, forecast.rate);
    let pv_cost = present_value(&forecast.costs, forecast.rate);
    if pv_rev <= 0.0 || pv_cost >= pv_rev {
        return Ok(Share::ZERO);
    }
    Ok(Share::from_f64_clamped((pv_rev - pv_cost) / pv_rev))
}
