use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommonValueMode {
    /// Bid the signal as if it were the value.
    Naive,
    /// Subtract the expected noise of the highest of `n` signals.
    Corrected,
}

/// Monte Carlo estimates of `E[max of n iid N(0,1)]`, filled lazily per `n`
/// and then only read.
#[derive(Debug)]
pub struct ExpectedMaxTable {
    draws: usize,
    stream: RngStream,
    cache: Mutex<BTreeMap<usize, f64>>,
}

impl ExpectedMaxTable {
    pub const DEFAULT_DRAWS: usize = 100_000;
    const SEED: u64 = 0x5eed_cafe;

    pub fn new(draws: usize, seed: u64) -> Self {
        ExpectedMaxTable {
            draws: draws.max(1),
            stream: RngStream::new(seed).child("expected-max"),
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    /// Process-wide table with 10^5 draws per entry.
    pub fn shared() -> &'static ExpectedMaxTable {
        static TABLE: OnceLock<ExpectedMaxTable> = OnceLock::new();
        TABLE.get_or_init(|| ExpectedMaxTable::new(Self::DEFAULT_DRAWS, Self::SEED))
    }

    /// Zero for a single bidder, where there is nothing to select on.
    pub fn expected_max(&self, n: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        if let Some(&v) = self.cache.lock().expect("table lock").get(&n) {
            return v;
        }
        let mut rng = self.stream.index(n as u64).rng();
        let mut total = 0.0;
        for _ in 0..self.draws {
            let mut best = f64::NEG_INFINITY;
            for _ in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                best = best.max(z);
            }
            total += best;
        }
        let estimate = total / self.draws as f64;
        *self
            .cache
            .lock()
            .expect("table lock")
            .entry(n)
            .or_insert(estimate)
    }

    pub fn correction(&self, n: usize, sigma: f64) -> f64 {
        if sigma == 0.0 {
            0.0
        } else {
            sigma * self.expected_max(n)
        }
    }
}

/// Bid in a common-value auction given a private signal `V + ε`, `ε ~ N(0, σ²)`.
pub fn common_value_bid(
    signal: Money,
    mode: CommonValueMode,
    n: usize,
    sigma: f64,
    table: &ExpectedMaxTable,
) -> Result<Money> {
    if n < 1 {
        return Err(Error::param("n", "need at least one bidder"));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param(
            "sigma",
            format!("{sigma} must be finite and >= 0"),
        ));
    }
    match mode {
        CommonValueMode::Naive => Ok(signal),
        CommonValueMode::Corrected => Ok(Money::from_f64_clamped(
            signal.to_f64() - table.correction(n, sigma),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_bids_signal() {
        let t = ExpectedMaxTable::new(10, 1);
        let b =
            common_value_bid(Money::from_units(120), CommonValueMode::Naive, 5, 10.0, &t).unwrap();
        assert_eq!(b, Money::from_units(120));
    }

    #[test]
    fn single_bidder_needs_no_correction() {
        let t = ExpectedMaxTable::new(10, 1);
        let b = common_value_bid(
            Money::from_units(120),
            CommonValueMode::Corrected,
            1,
            10.0,
            &t,
        )
        .unwrap();
        assert_eq!(b, Money::from_units(120));
    }

    #[test]
    fn zero_noise_needs_no_correction() {
        let t = ExpectedMaxTable::new(10, 1);
        let b = common_value_bid(
            Money::from_units(120),
            CommonValueMode::Corrected,
            5,
            0.0,
            &t,
        )
        .unwrap();
        assert_eq!(b, Money::from_units(120));
    }

    #[test]
    fn rejects_bad_parameters() {
        let t = ExpectedMaxTable::new(10, 1);
        assert!(common_value_bid(Money::ZERO, CommonValueMode::Naive, 0, 1.0, &t).is_err());
        assert!(common_value_bid(Money::ZERO, CommonValueMode::Naive, 2, -1.0, &t).is_err());
    }

    #[test]
    fn table_is_deterministic_and_cached() {
        let a = ExpectedMaxTable::new(2000, 9);
        let b = ExpectedMaxTable::new(2000, 9);
        assert_eq!(a.expected_max(3), b.expected_max(3));
        assert_eq!(a.expected_max(3), a.expected_max(3));
        assert!(a.expected_max(3) > a.expected_max(2));
    }
}
