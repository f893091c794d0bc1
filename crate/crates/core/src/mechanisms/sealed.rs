use std::collections::HashSet;

use crate::domain::{License, PriceBid};
use crate::error::{Error, Result};
use crate::mechanisms::{AuctionOutcome, BidAmount, DisclosedBid};
use crate::money::Money;
use crate::ranking::{break_tie, rank_bids};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceRule {
    FirstPrice,
    SecondPrice,
}

/// The deterministic part of a sealed price auction: who can win and at what price.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedResolution {
    /// Indices into the input of the highest qualifying bids (a tie when > 1).
    pub contenders: Vec<usize>,
    /// Price paid by whichever contender is picked.
    pub price: Money,
}

pub(crate) fn validate_bids<'a, B: crate::ranking::Rankable + 'a>(
    bids: impl IntoIterator<Item = &'a B>,
    license: &License,
) -> Result<()> {
    let mut seen = HashSet::new();
    for b in bids {
        if b.license() != &license.id {
            return Err(Error::WrongLicense {
                bidder: b.bidder().clone(),
                expected: license.id.clone(),
                found: b.license().clone(),
            });
        }
        if !seen.insert(b.bidder().clone()) {
            return Err(Error::DuplicateBidder(b.bidder().clone()));
        }
    }
    Ok(())
}

/// Winner set and price under `rule`, or `None` if no bid meets the reservation.
///
/// Second price is `max(next-highest qualifying bid, reservation)`; a sole
/// qualifying bid pays the reservation, or zero without one.
pub fn resolve_sealed(
    rule: PriceRule,
    bids: &[PriceBid],
    license: &License,
) -> Result<Option<SealedResolution>> {
    validate_bids(bids, license)?;
    let floor = license.floor();
    let qualifying: Vec<usize> = (0..bids.len())
        .filter(|&i| bids[i].amount >= floor)
        .collect();
    let ranked: Vec<PriceBid> = qualifying.iter().map(|&i| bids[i].clone()).collect();
    let ranking = rank_bids(&ranked)?;
    let Some(top) = ranking.top() else {
        return Ok(None);
    };
    let contenders: Vec<usize> = top.members.iter().map(|&m| qualifying[m]).collect();
    let top_amount = bids[contenders[0]].amount;
    let price = match rule {
        PriceRule::FirstPrice => top_amount,
        PriceRule::SecondPrice => {
            let runner_up = if top.is_tie() {
                Some(top_amount)
            } else {
                ranking.groups.get(1).map(|g| ranked[g.members[0]].amount)
            };
            runner_up.unwrap_or(Money::ZERO).max(floor)
        }
    };
    Ok(Some(SealedResolution { contenders, price }))
}

fn run_sealed(
    rule: PriceRule,
    bids: &[PriceBid],
    license: &License,
    rng: &RngStream,
) -> Result<AuctionOutcome> {
    let all_bids: Vec<DisclosedBid> = bids
        .iter()
        .map(|b| DisclosedBid {
            bidder: b.bidder.clone(),
            amount: BidAmount::Money(b.amount),
            round: None,
        })
        .collect();
    let Some(res) = resolve_sealed(rule, bids, license)? else {
        return Ok(AuctionOutcome::unsold(license.id.clone(), all_bids, 1));
    };
    let tie_stream = rng.child(license.id.as_str()).child("tie");
    let &winner = break_tie(&res.contenders, &tie_stream);
    Ok(AuctionOutcome {
        license: license.id.clone(),
        winner: Some(bids[winner].bidder.clone()),
        payment: Some(BidAmount::Money(res.price)),
        winning_bid: Some(BidAmount::Money(bids[winner].amount)),
        all_bids,
        rounds_used: 1,
        default_trace: Vec::new(),
        tie_broken: res.contenders.len() > 1,
    })
}

/// Highest bid at or above the reservation wins and pays its own bid.
pub fn run_first_price_sealed(
    bids: &[PriceBid],
    license: &License,
    rng: &RngStream,
) -> Result<AuctionOutcome> {
    run_sealed(PriceRule::FirstPrice, bids, license, rng)
}

/// Highest bid at or above the reservation wins and pays the second price.
pub fn run_vickrey_sealed(
    bids: &[PriceBid],
    license: &License,
    rng: &RngStream,
) -> Result<AuctionOutcome> {
    run_sealed(PriceRule::SecondPrice, bids, license, rng)
}
