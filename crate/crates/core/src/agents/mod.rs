//! Bidder strategies: how a profile and its market context turn into a bid.

mod common_value;
mod npv;
mod risk;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use common_value::{common_value_bid, CommonValueMode, ExpectedMaxTable};
pub use npv::{max_license_fee, present_value, share_backout, CashFlowForecast};
pub use risk::certainty_equivalent_bid;

use crate::error::{Error, Result};
use crate::money::Money;

/// A bidder's belief about (or the generator of) its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueDistribution {
    Point { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
}

impl ValueDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ValueDistribution::Point { value } if !value.is_finite() => {
                Err(Error::param("point", "value must be finite"))
            }
            ValueDistribution::Uniform { lo, hi }
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) =>
            {
                Err(Error::param(
                    "uniform",
                    format!("need finite lo <= hi, got [{lo}, {hi}]"),
                ))
            }
            ValueDistribution::Normal { mean, sd }
                if !(mean.is_finite() && sd.is_finite() && sd >= 0.0) =>
            {
                Err(Error::param(
                    "normal",
                    format!("need finite mean and sd >= 0, got ({mean}, {sd})"),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ValueDistribution::Point { value } => value,
            ValueDistribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            ValueDistribution::Normal { mean, .. } => mean,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match *self {
            ValueDistribution::Point { .. } => true,
            ValueDistribution::Uniform { lo, hi } => lo == hi,
            ValueDistribution::Normal { sd, .. } => sd == 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ValueDistribution::Point { value } => value,
            ValueDistribution::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ValueDistribution::Normal { mean, sd } => {
                if sd == 0.0 {
                    mean
                } else {
                    Normal::new(mean, sd).expect("validated normal").sample(rng)
                }
            }
        }
    }
}

pub fn truthful_bid(value: Money) -> Money {
    value
}

/// `(1 − gamma) × value`, for `gamma` in `[0, 1)`.
pub fn shaded_bid(value: Money, gamma: f64) -> Result<Money> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::param("gamma", format!("{gamma} outside [0, 1)")));
    }
    value.scale(1.0 - gamma)
}

/// Symmetric first-price equilibrium bid `((n−1)/n) × value` for values iid
/// uniform on `[0, 1]`.
pub fn equilibrium_fpsb_bid(value: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param(
            "n",
            format!("need at least 2 bidders, got {n}"),
        ));
    }
    Ok((n - 1) as f64 / n as f64 * value)
}

pub fn budget_constrained_bid(value: Money, budget: Money) -> Money {
    value.min(budget)
}
