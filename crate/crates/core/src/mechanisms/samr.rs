//! Simultaneous ascending multiple-round auction with straightforward bidders.
//!
//! Each round every eligible agent bids the minimum acceptable price on the one
//! license it does not already hold that leaves it the largest non-negative
//! surplus. New bids on a license in the same round are all at the same price;
//! one is chosen by a seeded draw. The auction closes after a round with no bids.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{BidderId, License, LicenseId};
use crate::error::{Error, Result};
use crate::mechanisms::{AuctionOutcome, BidAmount, DisclosedBid};
use crate::money::Money;
use crate::ranking::break_tie;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Increment {
    Absolute(Money),
    /// Fraction of the standing high bid, never less than one cent.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityRule {
    #[default]
    None,
    /// An agent that neither bids nor holds a standing high bid in a round is
    /// out for the rest of the auction.
    MustActEachRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamrConfig {
    pub increment: Increment,
    #[serde(default)]
    pub activity_rule: ActivityRule,
    pub max_rounds: u32,
    /// Minimum first bid on a license without a reservation.
    #[serde(default)]
    pub opening_bid: Money,
}

impl SamrConfig {
    pub fn with_increment(increment: Money) -> Self {
        SamrConfig {
            increment: Increment::Absolute(increment),
            activity_rule: ActivityRule::None,
            max_rounds: 10_000,
            opening_bid: Money::ZERO,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self.increment {
            Increment::Absolute(m) if m.is_zero() => {
                out.push("config.samr.increment must be > 0".to_string())
            }
            Increment::Fraction(f) if !(f.is_finite() && f > 0.0) => {
                out.push("config.samr.increment.fraction must be > 0".to_string())
            }
            _ => {}
        }
        if self.max_rounds == 0 {
            out.push("config.samr.max_rounds must be >= 1".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(v) => Err(Error::param("samr", v)),
            None => Ok(()),
        }
    }

    fn step(&self, standing: Money) -> Money {
        match self.increment {
            Increment::Absolute(m) => m,
            Increment::Fraction(f) => {
                let raw = standing.scale(f).unwrap_or(Money::MAX);
                raw.max(Money::from_cents(1).expect("one cent"))
            }
        }
    }
}

/// Straightforward bidder with additive per-license values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamrAgent {
    pub id: BidderId,
    pub values: BTreeMap<LicenseId, Money>,
}

impl SamrAgent {
    pub fn new(id: impl Into<BidderId>) -> Self {
        SamrAgent {
            id: id.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn value(mut self, license: impl Into<LicenseId>, value: Money) -> Self {
        self.values.insert(license.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundBid {
    pub bidder: BidderId,
    pub license: LicenseId,
    pub amount: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub bids: Vec<RoundBid>,
    /// Standing high bid per license after the round, in license order.
    pub standing: Vec<Option<(BidderId, Money)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamrReport {
    pub outcomes: Vec<AuctionOutcome>,
    pub round_log: Vec<RoundRecord>,
    /// Last round in which any bid was placed, at least 1. The closing quiet
    /// round is not counted.
    pub rounds_used: u32,
    /// False when `max_rounds` ran out while bids were still arriving.
    pub terminated: bool,
}

#[derive(Clone, Copy)]
struct Standing {
    holder: usize,
    price: Money,
    tie: bool,
}

pub fn run_samr(
    agents: &[SamrAgent],
    licenses: &[License],
    config: &SamrConfig,
    rng: &RngStream,
) -> Result<SamrReport> {
    config.validate()?;
    let mut seen = std::collections::HashSet::new();
    for a in agents {
        if !seen.insert(&a.id) {
            return Err(Error::DuplicateBidder(a.id.clone()));
        }
    }

    let mut standing: Vec<Option<Standing>> = vec![None; licenses.len()];
    let mut eligible = vec![true; agents.len()];
    let mut disclosed: Vec<Vec<DisclosedBid>> = vec![Vec::new(); licenses.len()];
    let mut round_log = Vec::new();
    let mut last_active = 0u32;
    let mut terminated = false;

    for round in 1..=config.max_rounds {
        let required: Vec<Money> = licenses
            .iter()
            .zip(&standing)
            .map(|(lic, s)| match s {
                None => config.opening_bid.max(lic.floor()),
                Some(s) => s
                    .price
                    .checked_add(config.step(s.price))
                    .unwrap_or(Money::MAX),
            })
            .collect();

        // license index -> agents bidding on it this round
        let mut submissions: Vec<Vec<usize>> = vec![Vec::new(); licenses.len()];
        let mut acted = vec![false; agents.len()];
        for (ai, agent) in agents.iter().enumerate() {
            if !eligible[ai] {
                continue;
            }
            let mut best: Option<(Money, usize)> = None;
            for (li, lic) in licenses.iter().enumerate() {
                if standing[li].is_some_and(|s| s.holder == ai) {
                    continue;
                }
                let Some(&value) = agent.values.get(&lic.id) else {
                    continue;
                };
                let Ok(surplus) = value.checked_sub(required[li]) else {
                    continue;
                };
                if best.is_none_or(|(s, _)| surplus > s) {
                    best = Some((surplus, li));
                }
            }
            if let Some((_, li)) = best {
                submissions[li].push(ai);
                acted[ai] = true;
            }
        }

        if config.activity_rule == ActivityRule::MustActEachRound {
            for ai in 0..agents.len() {
                let holds = standing.iter().flatten().any(|s| s.holder == ai);
                if eligible[ai] && !acted[ai] && !holds {
                    eligible[ai] = false;
                }
            }
        }

        if submissions.iter().all(Vec::is_empty) {
            terminated = true;
            break;
        }
        last_active = round;

        let mut round_bids = Vec::new();
        for (li, bidders) in submissions.iter().enumerate() {
            if bidders.is_empty() {
                continue;
            }
            let price = required[li];
            for &ai in bidders {
                disclosed[li].push(DisclosedBid {
                    bidder: agents[ai].id.clone(),
                    amount: BidAmount::Money(price),
                    round: Some(round),
                });
                round_bids.push(RoundBid {
                    bidder: agents[ai].id.clone(),
                    license: licenses[li].id.clone(),
                    amount: price,
                });
            }
            let tie_stream = rng
                .child(licenses[li].id.as_str())
                .child("tie")
                .index(u64::from(round));
            let &holder = break_tie(bidders, &tie_stream);
            standing[li] = Some(Standing {
                holder,
                price,
                tie: bidders.len() > 1,
            });
        }
        round_log.push(RoundRecord {
            round,
            bids: round_bids,
            standing: standing
                .iter()
                .map(|s| s.map(|s| (agents[s.holder].id.clone(), s.price)))
                .collect(),
        });
    }

    let rounds_used = last_active.max(1);
    let outcomes = licenses
        .iter()
        .zip(standing)
        .zip(disclosed)
        .map(|((lic, s), all_bids)| match s {
            None => AuctionOutcome::unsold(lic.id.clone(), all_bids, rounds_used),
            Some(s) => AuctionOutcome {
                license: lic.id.clone(),
                winner: Some(agents[s.holder].id.clone()),
                payment: Some(BidAmount::Money(s.price)),
                winning_bid: Some(BidAmount::Money(s.price)),
                all_bids,
                rounds_used,
                default_trace: Vec::new(),
                tie_broken: s.tie,
            },
        })
        .collect();
    Ok(SamrReport {
        outcomes,
        round_log,
        rounds_used,
        terminated,
    })
}
