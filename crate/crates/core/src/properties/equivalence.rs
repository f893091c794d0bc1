//! Monte Carlo check that first-price and second-price sealed bids raise the
//! same expected revenue under iid uniform private values.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{equilibrium_fpsb_bid, shaded_bid};
use crate::domain::{License, PriceBid};
use crate::error::{Error, Result};
use crate::mechanisms::{resolve_sealed, PriceRule};
use crate::money::Money;
use crate::rng::RngStream;

/// Values are drawn on `[0, 1]` and carried as money at this many units per
/// unit value, so cent rounding sits at `1e-6` of the value range.
pub const VALUE_SCALE: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueEquivalenceSetup {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Shade factor applied to every second-price bid; `0.0` is truthful.
    pub vickrey_shading: f64,
}

impl RevenueEquivalenceSetup {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        RevenueEquivalenceSetup {
            n,
            trials,
            seed,
            vickrey_shading: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueEquivalenceReport {
    pub n: usize,
    pub trials: usize,
    pub mean_fpsb: f64,
    pub se_fpsb: f64,
    pub mean_vickrey: f64,
    pub se_vickrey: f64,
    /// `sqrt(se_fpsb² + se_vickrey²)`.
    pub pooled_se: f64,
    /// `(n − 1) / (n + 1)`.
    pub theoretical: f64,
    pub means_agree: bool,
    pub fpsb_matches_theory: bool,
    pub vickrey_matches_theory: bool,
    pub pass: bool,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn revenues(
    setup: &RevenueEquivalenceSetup,
    rule: PriceRule,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    let license = License::new("equivalence");
    let ids: Vec<String> = (0..setup.n).map(|i| format!("b{i}")).collect();
    (0..setup.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream.index(t).rng();
            let mut bids = Vec::with_capacity(setup.n);
            for id in &ids {
                let v: f64 = rng.random();
                let amount = match rule {
                    PriceRule::FirstPrice => {
                        Money::from_f64(equilibrium_fpsb_bid(v, setup.n)? * VALUE_SCALE)?
                    }
                    PriceRule::SecondPrice => {
                        shaded_bid(Money::from_f64(v * VALUE_SCALE)?, setup.vickrey_shading)?
                    }
                };
                bids.push(PriceBid::new(id.as_str(), "equivalence", amount));
            }
            let price = resolve_sealed(rule, &bids, &license)?.map_or(Money::ZERO, |r| r.price);
            Ok(price.to_f64() / VALUE_SCALE)
        })
        .collect()
}

/// Runs `trials` first-price auctions with equilibrium bidders and `trials`
/// second-price auctions with truthful bidders, on independent draws.
///
/// Passes when the two means are within 3 pooled standard errors of each
/// other and each is within 3 of its own standard errors of `(n−1)/(n+1)`.
pub fn revenue_equivalence_test(
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RevenueEquivalenceReport> {
    revenue_equivalence_test_with(&RevenueEquivalenceSetup::new(n, trials, seed))
}

pub fn revenue_equivalence_test_with(
    setup: &RevenueEquivalenceSetup,
) -> Result<RevenueEquivalenceReport> {
    if setup.n < 2 {
        return Err(Error::param(
            "n",
            format!("need at least 2 bidders, got {}", setup.n),
        ));
    }
    if setup.trials < 2 {
        return Err(Error::param("trials", "need at least 2 trials"));
    }
    let root = RngStream::new(setup.seed).child("equivalence");
    let fpsb = revenues(setup, PriceRule::FirstPrice, &root.child("fpsb"))?;
    let vickrey = revenues(setup, PriceRule::SecondPrice, &root.child("vickrey"))?;
    let (mean_fpsb, se_fpsb) = mean_se(&fpsb);
    let (mean_vickrey, se_vickrey) = mean_se(&vickrey);
    let pooled_se = se_fpsb.hypot(se_vickrey);
    let theoretical = (setup.n - 1) as f64 / (setup.n + 1) as f64;
    let means_agree = (mean_fpsb - mean_vickrey).abs() <= 3.0 * pooled_se;
    let fpsb_matches_theory = (mean_fpsb - theoretical).abs() <= 3.0 * se_fpsb;
    let vickrey_matches_theory = (mean_vickrey - theoretical).abs() <= 3.0 * se_vickrey;
    Ok(RevenueEquivalenceReport {
        n: setup.n,
        trials: setup.trials,
        mean_fpsb,
        se_fpsb,
        mean_vickrey,
        se_vickrey,
        pooled_se,
        theoretical,
        means_agree,
        fpsb_matches_theory,
        vickrey_matches_theory,
        pass: means_agree && fpsb_matches_theory && vickrey_matches_theory,
    })
}
