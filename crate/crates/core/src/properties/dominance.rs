//! Exhaustive grid checks of truthful bidding.
//!
//! Utilities are expected values over the seeded tie-break, so a `k`-way tie
//! at the top is worth `1/k` of the winning payoff. Money utilities compare as
//! exact fractions of cents.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{License, PriceBid, ShareBid};
use crate::error::{Error, Result};
use crate::mechanisms::{
    compute_payment_schedule, resolve_sealed, resolve_share, MechanismKind, PriceRule,
};
use crate::money::{Money, Share};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    WeaklyDominant,
    NotDominant,
}

/// A profile where some deviation beats truthful bidding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    /// True value, in currency or as a share.
    pub value: String,
    pub deviation: String,
    pub opponents: Vec<String>,
    pub truthful_utility: f64,
    pub deviation_utility: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub mechanism: MechanismKind,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    /// (value, opponent profile) pairs examined.
    pub profiles_checked: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceGrid {
    pub values: Vec<Money>,
    pub bids: Vec<Money>,
    pub opponent_bids: Vec<Money>,
    pub max_opponents: usize,
}

fn even_grid(hi: u32, points: u32) -> Vec<Money> {
    (0..points)
        .map(|i| Money::from_units(hi * i / (points - 1)))
        .collect()
}

impl Default for DominanceGrid {
    /// 21 values and bids on `[0, 100]`, opponents on `{0, 25, 50, 75, 100}`,
    /// up to two of them.
    fn default() -> Self {
        DominanceGrid {
            values: even_grid(100, 21),
            bids: even_grid(100, 21),
            opponent_bids: even_grid(100, 5),
            max_opponents: 2,
        }
    }
}

/// Expected utility `numer / denom` in cents.
#[derive(Debug, Clone, Copy)]
struct Fraction {
    numer: i128,
    denom: i128,
}

impl Fraction {
    const ZERO: Fraction = Fraction { numer: 0, denom: 1 };

    fn to_units(self) -> f64 {
        self.numer as f64 / self.denom as f64 / 100.0
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Fraction {}
impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.numer * other.denom).cmp(&(other.numer * self.denom))
    }
}

/// All ordered opponent profiles with `0..=max` members.
fn opponent_profiles<T: Clone>(grid: &[T], max: usize) -> Vec<Vec<T>> {
    let mut all = vec![Vec::new()];
    let mut layer: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|p| {
                grid.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x.clone());
                    q
                })
            })
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

fn price_utility(
    rule: PriceRule,
    value: Money,
    bid: Money,
    opponents: &[Money],
) -> Result<Fraction> {
    let license = License::new("grid");
    let mut bids = vec![PriceBid::new("self", "grid", bid)];
    bids.extend(
        opponents
            .iter()
            .enumerate()
            .map(|(i, &b)| PriceBid::new(format!("opp{i}"), "grid", b)),
    );
    let Some(res) = resolve_sealed(rule, &bids, &license)? else {
        return Ok(Fraction::ZERO);
    };
    if !res.contenders.contains(&0) {
        return Ok(Fraction::ZERO);
    }
    Ok(Fraction {
        numer: i128::from(value.cents()) - i128::from(res.price.cents()),
        denom: res.contenders.len() as i128,
    })
}

/// Is truthful bidding weakly dominant for a sealed price auction on `grid`?
///
/// Checks every value, every opponent profile and every deviation on the bid
/// grid. The first failing `(value, profile)` in grid order is reported with
/// its most profitable deviation.
pub fn check_weak_dominance(
    mechanism: MechanismKind,
    grid: &DominanceGrid,
) -> Result<DominanceReport> {
    let rule = match mechanism {
        MechanismKind::Fpsb => PriceRule::FirstPrice,
        MechanismKind::Vickrey => PriceRule::SecondPrice,
        other => {
            return Err(Error::param(
                "mechanism",
                format!("{other} is not a sealed price auction"),
            ))
        }
    };
    if grid.values.is_empty() || grid.bids.is_empty() {
        return Err(Error::param(
            "grid",
            "value and bid grids must be non-empty",
        ));
    }
    let profiles = opponent_profiles(&grid.opponent_bids, grid.max_opponents);
    let found: Vec<Option<Counterexample>> = grid
        .values
        .par_iter()
        .map(|&value| -> Result<Option<Counterexample>> {
            for opp in &profiles {
                let truthful = price_utility(rule, value, value, opp)?;
                let mut best: Option<(Money, Fraction)> = None;
                for &dev in &grid.bids {
                    let u = price_utility(rule, value, dev, opp)?;
                    if u > truthful && best.is_none_or(|(_, b)| u > b) {
                        best = Some((dev, u));
                    }
                }
                if let Some((dev, u)) = best {
                    return Ok(Some(Counterexample {
                        value: value.to_string(),
                        deviation: dev.to_string(),
                        opponents: opp.iter().map(ToString::to_string).collect(),
                        truthful_utility: truthful.to_units(),
                        deviation_utility: u.to_units(),
                        gain: u.to_units() - truthful.to_units(),
                    }));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let counterexample = found.into_iter().flatten().next();
    Ok(DominanceReport {
        mechanism,
        verdict: if counterexample.is_some() {
            Verdict::NotDominant
        } else {
            Verdict::WeaklyDominant
        },
        counterexample,
        profiles_checked: (grid.values.len() * profiles.len()) as u64,
    })
}

impl Counterexample {
    /// Recomputes both utilities through the mechanism and confirms the gain.
    pub fn replay(&self, mechanism: MechanismKind) -> Result<bool> {
        let rule = match mechanism {
            MechanismKind::Fpsb => PriceRule::FirstPrice,
            MechanismKind::Vickrey => PriceRule::SecondPrice,
            other => {
                return Err(Error::param(
                    "mechanism",
                    format!("{other} cannot replay a price counterexample"),
                ))
            }
        };
        let value: Money = self.value.parse()?;
        let dev: Money = self.deviation.parse()?;
        let opp: Vec<Money> = self
            .opponents
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        let truthful = price_utility(rule, value, value, &opp)?;
        let deviated = price_utility(rule, value, dev, &opp)?;
        Ok(deviated > truthful
            && (deviated.to_units() - truthful.to_units() - self.gain).abs() < 1e-9)
    }
}

/// What a share bidder believes it will pay when it wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareUtilityModel {
    /// The escrowed valuation is sealed at bid time, so the bidder prices the
    /// share as paid for the whole project life.
    FullLife,
    /// Ex-post view: payments stop once the escrowed valuation is reached.
    EscrowAware,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareOverbidGrid {
    pub true_shares: Vec<Share>,
    pub opponent_shares: Vec<Share>,
    pub max_opponents: usize,
    pub revenues: Vec<Money>,
    pub v_g: Money,
    pub rate: f64,
    pub model: ShareUtilityModel,
}

impl Default for ShareOverbidGrid {
    /// Shares `0, 0.025, …, 0.5`, opponents on `{0, 0.1, 0.2, 0.3, 0.4}` (up to
    /// two), 30 periods of revenue 100 at a 10% hurdle rate, valuation 500.
    fn default() -> Self {
        ShareOverbidGrid {
            true_shares: (0..=20)
                .map(|i| Share::from_micros(i * 25_000).expect("grid share"))
                .collect(),
            opponent_shares: (0..5)
                .map(|i| Share::from_micros(i * 100_000).expect("grid share"))
                .collect(),
            max_opponents: 2,
            revenues: vec![Money::from_units(100); 30],
            v_g: Money::from_units(500),
            rate: 0.10,
            model: ShareUtilityModel::FullLife,
        }
    }
}

impl ShareOverbidGrid {
    fn cost(&self, share: Share) -> f64 {
        let cap = match self.model {
            ShareUtilityModel::FullLife => Money::MAX,
            ShareUtilityModel::EscrowAware => self.v_g,
        };
        compute_payment_schedule(share, &self.revenues, cap).present_value(self.rate)
    }

    /// Present value of carrying `share` for the whole life: what a bidder
    /// whose true share is `share` is willing to give up.
    fn worth(&self, share: Share) -> f64 {
        compute_payment_schedule(share, &self.revenues, Money::MAX).present_value(self.rate)
    }

    fn utility(&self, true_share: Share, bid: Share, opponents: &[Share]) -> Result<f64> {
        let license = License::new("grid");
        let mut bids = vec![ShareBid::new("self", "grid", bid)];
        bids.extend(
            opponents
                .iter()
                .enumerate()
                .map(|(i, &s)| ShareBid::new(format!("opp{i}"), "grid", s)),
        );
        let Some(res) = resolve_share(&bids, &license)? else {
            return Ok(0.0);
        };
        if !res.contenders.contains(&0) {
            return Ok(0.0);
        }
        Ok((self.worth(true_share) - self.cost(res.paid)) / res.contenders.len() as f64)
    }
}

/// One-sided check: bidding any share above one's true share never pays.
pub fn check_no_overbid_incentive_share(grid: &ShareOverbidGrid) -> Result<DominanceReport> {
    if grid.true_shares.is_empty() {
        return Err(Error::param("grid", "share grid must be non-empty"));
    }
    if !(grid.rate.is_finite() && grid.rate >= 0.0) {
        return Err(Error::param(
            "rate",
            format!("{} must be finite and >= 0", grid.rate),
        ));
    }
    let profiles = opponent_profiles(&grid.opponent_shares, grid.max_opponents);
    let found: Vec<Option<Counterexample>> = grid
        .true_shares
        .par_iter()
        .map(|&s| -> Result<Option<Counterexample>> {
            for opp in &profiles {
                let truthful = grid.utility(s, s, opp)?;
                let mut best: Option<(Share, f64)> = None;
                for &dev in grid.true_shares.iter().filter(|&&d| d > s) {
                    let u = grid.utility(s, dev, opp)?;
                    if u > truthful && best.is_none_or(|(_, b)| u > b) {
                        best = Some((dev, u));
                    }
                }
                if let Some((dev, u)) = best {
                    return Ok(Some(Counterexample {
                        value: s.to_string(),
                        deviation: dev.to_string(),
                        opponents: opp.iter().map(ToString::to_string).collect(),
                        truthful_utility: truthful,
                        deviation_utility: u,
                        gain: u - truthful,
                    }));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let counterexample = found.into_iter().flatten().next();
    Ok(DominanceReport {
        mechanism: MechanismKind::Share,
        verdict: if counterexample.is_some() {
            Verdict::NotDominant
        } else {
            Verdict::WeaklyDominant
        },
        counterexample,
        profiles_checked: (grid.true_shares.len() * profiles.len()) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_enumeration_counts() {
        let p = opponent_profiles(&[1, 2, 3, 4, 5], 2);
        assert_eq!(p.len(), 1 + 5 + 25);
        assert!(p[0].is_empty());
    }

    #[test]
    fn vickrey_is_weakly_dominant() {
        let r = check_weak_dominance(MechanismKind::Vickrey, &DominanceGrid::default()).unwrap();
        assert_eq!(r.verdict, Verdict::WeaklyDominant);
        assert!(r.counterexample.is_none());
        assert_eq!(r.profiles_checked, 21 * 31);
    }

    #[test]
    fn fpsb_is_not_and_counterexample_replays() {
        let r = check_weak_dominance(MechanismKind::Fpsb, &DominanceGrid::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotDominant);
        let cx = r.counterexample.unwrap();
        assert!(cx.gain > 0.0);
        assert!(cx.replay(MechanismKind::Fpsb).unwrap());
        // the same profile is not a counterexample under second price
        assert!(!cx.replay(MechanismKind::Vickrey).unwrap());
    }

    #[test]
    fn fpsb_shading_against_single_opponent() {
        let u = |bid: u32| {
            price_utility(
                PriceRule::FirstPrice,
                Money::from_units(100),
                Money::from_units(bid),
                &[Money::from_units(50)],
            )
            .unwrap()
        };
        assert_eq!(u(51).to_units() - u(100).to_units(), 49.0);
        assert_eq!(u(50).to_units(), 25.0);
        assert_eq!(u(49), Fraction::ZERO);

        let grid = DominanceGrid {
            values: vec![Money::from_units(100)],
            bids: (0..=100).map(Money::from_units).collect(),
            opponent_bids: vec![Money::from_units(50)],
            max_opponents: 1,
        };
        // the empty profile comes first: alone, the best bid is zero
        let cx = check_weak_dominance(MechanismKind::Fpsb, &grid)
            .unwrap()
            .counterexample
            .unwrap();
        assert!(cx.opponents.is_empty());
        assert_eq!((cx.deviation.as_str(), cx.gain), ("0.00", 100.0));
    }

    #[test]
    fn sole_bidder_truthful_is_trivially_dominant() {
        let grid = DominanceGrid {
            max_opponents: 0,
            ..DominanceGrid::default()
        };
        let r = check_weak_dominance(MechanismKind::Vickrey, &grid).unwrap();
        assert_eq!(r.verdict, Verdict::WeaklyDominant);
    }

    #[test]
    fn rejects_other_mechanisms_and_empty_grids() {
        assert!(check_weak_dominance(MechanismKind::Samr, &DominanceGrid::default()).is_err());
        let grid = DominanceGrid {
            values: vec![],
            ..DominanceGrid::default()
        };
        assert!(check_weak_dominance(MechanismKind::Vickrey, &grid).is_err());
    }

    #[test]
    fn share_overbid_full_life_passes() {
        let r = check_no_overbid_incentive_share(&ShareOverbidGrid::default()).unwrap();
        assert_eq!(r.verdict, Verdict::WeaklyDominant, "{:?}", r.counterexample);
    }

    #[test]
    fn share_no_deviation_means_equal_utility() {
        let g = ShareOverbidGrid::default();
        let s: Share = "0.2".parse().unwrap();
        let opp = ["0.1".parse().unwrap()];
        assert_eq!(
            g.utility(s, s, &opp).unwrap(),
            g.utility(s, s, &opp).unwrap()
        );
    }

    #[test]
    fn share_zero_revenue_is_vacuous() {
        let grid = ShareOverbidGrid {
            revenues: vec![Money::ZERO; 30],
            ..ShareOverbidGrid::default()
        };
        let r = check_no_overbid_incentive_share(&grid).unwrap();
        assert_eq!(r.verdict, Verdict::WeaklyDominant);
        assert_eq!(
            grid.utility("0.3".parse().unwrap(), "0.4".parse().unwrap(), &[])
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn escrow_aware_bidders_can_gain_from_overbidding_small_valuations() {
        // Payments stop at a valuation of 50, far below what a 0.1+ share of a
        // 30-period stream of 100 is worth, so winning at a higher share pays.
        let grid = ShareOverbidGrid {
            v_g: Money::from_units(50),
            model: ShareUtilityModel::EscrowAware,
            ..ShareOverbidGrid::default()
        };
        let r = check_no_overbid_incentive_share(&grid).unwrap();
        assert_eq!(r.verdict, Verdict::NotDominant);
    }

    #[test]
    fn escrow_aware_with_unreachable_valuation_matches_full_life() {
        let grid = ShareOverbidGrid {
            v_g: Money::from_units(1_000_000),
            model: ShareUtilityModel::EscrowAware,
            ..ShareOverbidGrid::default()
        };
        let r = check_no_overbid_incentive_share(&grid).unwrap();
        assert_eq!(r.verdict, Verdict::WeaklyDominant);
    }
}
