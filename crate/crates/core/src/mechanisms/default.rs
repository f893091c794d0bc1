use std::collections::{BTreeMap, HashSet};

use crate::domain::{BidderId, License, PriceBid};
use crate::error::{Error, Result};
use crate::mechanisms::{AuctionOutcome, BidAmount, DefaultRecord};
use crate::money::Money;
use crate::ranking::rank_bids;

/// Replays a price-auction outcome against what each bidder can actually pay.
///
/// While the current winner's payment exceeds its ceiling, the winner defaults
/// (penalty = `penalty_fraction × its bid`) and the next-highest remaining
/// bidder is promoted at its own bid. Bidders missing from `affordability` can
/// pay anything. Equal bids are promoted in submission order. Promoted bids
/// below the reservation cannot win, and the license goes unsold if everyone
/// defaults.
pub fn resolve_default_cascade(
    outcome: &AuctionOutcome,
    affordability: &BTreeMap<BidderId, Money>,
    penalty_fraction: f64,
    license: &License,
) -> Result<AuctionOutcome> {
    if !(0.0..=1.0).contains(&penalty_fraction) {
        return Err(Error::param(
            "penalty_fraction",
            format!("{penalty_fraction} outside [0, 1]"),
        ));
    }
    let Some(first_winner) = outcome.winner.clone() else {
        return Ok(outcome.clone());
    };
    let bids: Vec<PriceBid> = outcome
        .all_bids
        .iter()
        .map(|d| match d.amount {
            BidAmount::Money(m) => Ok(PriceBid::new(d.bidder.clone(), license.id.clone(), m)),
            BidAmount::Share(_) => Err(Error::param(
                "outcome",
                "default cascade needs a money-bid outcome",
            )),
        })
        .collect::<Result<_>>()?;
    let ranking = rank_bids(&bids)?;
    let bid_of = |who: &BidderId| bids.iter().find(|b| &b.bidder == who).map(|b| b.amount);

    let mut result = outcome.clone();
    let mut tried: HashSet<BidderId> = HashSet::new();
    let mut current = first_winner;
    let mut required = outcome
        .money_payment()
        .ok_or_else(|| Error::param("outcome", "winner without a money payment"))?;
    loop {
        let ceiling = affordability.get(&current).copied().unwrap_or(Money::MAX);
        if required <= ceiling {
            if result.default_trace.is_empty() {
                return Ok(result);
            }
            result.winner = Some(current);
            result.payment = Some(BidAmount::Money(required));
            result.winning_bid = Some(BidAmount::Money(required));
            result.tie_broken = false;
            return Ok(result);
        }
        let bid = bid_of(&current).unwrap_or(required);
        result.default_trace.push(DefaultRecord {
            bidder: current.clone(),
            bid,
            penalty: bid.scale(penalty_fraction)?,
        });
        tried.insert(current);
        let next = ranking
            .order()
            .map(|i| &bids[i])
            .find(|b| !tried.contains(&b.bidder) && b.amount >= license.floor());
        match next {
            Some(b) => {
                current = b.bidder.clone();
                required = b.amount;
            }
            None => {
                result.winner = None;
                result.payment = None;
                result.winning_bid = None;
                return Ok(result);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::run_first_price_sealed;
    use crate::rng::RngStream;

    fn fpsb(pairs: &[(&str, u32)]) -> AuctionOutcome {
        let bids: Vec<PriceBid> = pairs
            .iter()
            .map(|(b, a)| PriceBid::new(*b, "L", Money::from_units(*a)))
            .collect();
        run_first_price_sealed(&bids, &License::new("L"), &RngStream::new(1)).unwrap()
    }

    fn ceilings(pairs: &[(&str, u32)]) -> BTreeMap<BidderId, Money> {
        pairs
            .iter()
            .map(|(b, a)| (BidderId::from(*b), Money::from_units(*a)))
            .collect()
    }

    #[test]
    fn no_default_leaves_outcome_unchanged() {
        let out = fpsb(&[("a", 200), ("b", 100)]);
        let res =
            resolve_default_cascade(&out, &BTreeMap::new(), 0.01, &License::new("L")).unwrap();
        assert_eq!(res, out);
    }

    #[test]
    fn all_default_means_unsold() {
        let out = fpsb(&[("a", 200), ("b", 100)]);
        let res = resolve_default_cascade(
            &out,
            &ceilings(&[("a", 1), ("b", 1)]),
            0.1,
            &License::new("L"),
        )
        .unwrap();
        assert!(!res.is_sold());
        assert_eq!(res.default_trace.len(), 2);
        assert_eq!(res.penalties_total(), Money::from_units(30));
    }

    #[test]
    fn promotion_skips_bids_below_reservation() {
        let lic = License::new("L").with_reservation(Money::from_units(150));
        let bids = vec![
            PriceBid::new("a", "L", Money::from_units(200)),
            PriceBid::new("b", "L", Money::from_units(100)),
        ];
        let out = run_first_price_sealed(&bids, &lic, &RngStream::new(1)).unwrap();
        let res = resolve_default_cascade(&out, &ceilings(&[("a", 10)]), 0.0, &lic).unwrap();
        assert!(!res.is_sold());
    }

    #[test]
    fn bad_fraction_rejected() {
        let out = fpsb(&[("a", 1)]);
        assert!(resolve_default_cascade(&out, &BTreeMap::new(), 1.5, &License::new("L")).is_err());
    }
}
