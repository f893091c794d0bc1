//! Second-share revenue auction with an escrowed government valuation.

use serde::{Deserialize, Serialize};

use crate::domain::{License, LicenseId, ShareBid};
use crate::error::{Error, Result};
use crate::mechanisms::sealed::validate_bids;
use crate::mechanisms::{AuctionOutcome, BidAmount, DisclosedBid};
use crate::money::{Money, Share};
use crate::ranking::{break_tie, rank_bids};
use crate::rng::RngStream;

/// The government's valuation, lodged before bidding.
///
/// The amount can only be read after [`EscrowedValuation::reveal`], which the
/// share auction calls once the winner is fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscrowedValuation {
    license: LicenseId,
    v_g: Money,
    revealed: bool,
}

impl EscrowedValuation {
    pub fn seal(license: impl Into<LicenseId>, v_g: Money) -> Self {
        EscrowedValuation {
            license: license.into(),
            v_g,
            revealed: false,
        }
    }

    pub fn license(&self) -> &LicenseId {
        &self.license
    }

    pub fn is_revealed(&self) -> bool {
        self.revealed
    }

    /// `None` while sealed.
    pub fn revealed_value(&self) -> Option<Money> {
        self.revealed.then_some(self.v_g)
    }

    pub fn reveal(&mut self) -> Money {
        self.revealed = true;
        self.v_g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    /// 1-based period number.
    pub period: u32,
    pub revenue: Money,
    pub payment: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaymentSchedule {
    pub share_paid: Share,
    pub entries: Vec<ScheduleEntry>,
    pub complete: bool,
    pub shortfall: Money,
}

impl PaymentSchedule {
    pub fn total_paid(&self) -> Money {
        self.entries.iter().map(|e| e.payment).sum()
    }

    /// Running totals, one per entry.
    pub fn cumulative(&self) -> Vec<Money> {
        self.entries
            .iter()
            .scan(Money::ZERO, |acc, e| {
                *acc = *acc + e.payment;
                Some(*acc)
            })
            .collect()
    }

    /// Payments discounted at `rate` per period, period `t` weighted by `(1+rate)^-t`.
    pub fn present_value(&self, rate: f64) -> f64 {
        self.entries
            .iter()
            .map(|e| e.payment.to_f64() / (1.0 + rate).powi(e.period as i32))
            .sum()
    }
}

/// Pays `share × revenue` each period until the cumulative total reaches `v_g`.
///
/// Rounding is applied to the running total, not to each payment, so after
/// every period the cumulative paid is exactly `min(v_g, share × revenues so
/// far)` at cent precision. The last payment is cut down to land on `v_g`. If
/// the stream ends first the schedule is incomplete and carries a shortfall.
pub fn compute_payment_schedule(share: Share, revenues: &[Money], v_g: Money) -> PaymentSchedule {
    let mut entries = Vec::new();
    let mut revenue_so_far = Money::ZERO;
    let mut paid = Money::ZERO;
    let mut complete = v_g.is_zero();
    for (t, &revenue) in revenues.iter().enumerate() {
        if complete {
            break;
        }
        revenue_so_far = revenue_so_far + revenue;
        let target = share.of(revenue_so_far).min(v_g);
        let payment = target
            .checked_sub(paid)
            .expect("cumulative target never decreases");
        paid = target;
        entries.push(ScheduleEntry {
            period: t as u32 + 1,
            revenue,
            payment,
        });
        complete = paid == v_g;
    }
    PaymentSchedule {
        share_paid: share,
        entries,
        complete,
        shortfall: v_g.saturating_sub(paid),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareAuctionResult {
    pub outcome: AuctionOutcome,
    /// Present when the license sold.
    pub schedule: Option<PaymentSchedule>,
    /// Still sealed when nothing sold.
    pub escrow: EscrowedValuation,
}

/// Who can win a share auction and which share the winner pays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareResolution {
    /// Indices of the highest qualifying share bids.
    pub contenders: Vec<usize>,
    pub paid: Share,
}

/// Deterministic part of the share auction: `None` if no bid meets the
/// reservation share.
pub fn resolve_share(bids: &[ShareBid], license: &License) -> Result<Option<ShareResolution>> {
    validate_bids(bids, license)?;
    let floor = license.reservation_share.unwrap_or(Share::ZERO);
    let qualifying: Vec<usize> = (0..bids.len())
        .filter(|&i| bids[i].share >= floor)
        .collect();
    let ranked: Vec<ShareBid> = qualifying.iter().map(|&i| bids[i].clone()).collect();
    let ranking = rank_bids(&ranked)?;
    let Some(top) = ranking.top() else {
        return Ok(None);
    };
    let second = if top.is_tie() {
        Some(ranked[top.members[0]].share)
    } else {
        ranking.groups.get(1).map(|g| ranked[g.members[0]].share)
    };
    Ok(Some(ShareResolution {
        contenders: top.members.iter().map(|&m| qualifying[m]).collect(),
        paid: second.unwrap_or(Share::ZERO).max(floor),
    }))
}

/// Highest share wins and pays the second-highest share (or the reservation
/// share, or zero) until the escrowed valuation is paid off.
pub fn run_share_auction(
    bids: &[ShareBid],
    license: &License,
    mut escrow: EscrowedValuation,
    revenues: &[Money],
    rng: &RngStream,
) -> Result<ShareAuctionResult> {
    if escrow.license() != &license.id {
        return Err(Error::param(
            "escrow",
            format!(
                "valuation lodged for {}, auction is for {}",
                escrow.license(),
                license.id
            ),
        ));
    }
    let all_bids: Vec<DisclosedBid> = bids
        .iter()
        .map(|b| DisclosedBid {
            bidder: b.bidder.clone(),
            amount: BidAmount::Share(b.share),
            round: None,
        })
        .collect();
    let Some(res) = resolve_share(bids, license)? else {
        return Ok(ShareAuctionResult {
            outcome: AuctionOutcome::unsold(license.id.clone(), all_bids, 1),
            schedule: None,
            escrow,
        });
    };
    let tie_stream = rng.child(license.id.as_str()).child("tie");
    let &winner = break_tie(&res.contenders, &tie_stream);
    let top_share = bids[winner].share;
    let paid = res.paid;

    let v_g = escrow.reveal();
    let schedule = compute_payment_schedule(paid, revenues, v_g);
    Ok(ShareAuctionResult {
        outcome: AuctionOutcome {
            license: license.id.clone(),
            winner: Some(bids[winner].bidder.clone()),
            payment: Some(BidAmount::Share(paid)),
            winning_bid: Some(BidAmount::Share(top_share)),
            all_bids,
            rounds_used: 1,
            default_trace: Vec::new(),
            tie_broken: res.contenders.len() > 1,
        },
        schedule: Some(schedule),
        escrow,
    })
}
