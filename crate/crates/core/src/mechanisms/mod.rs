//! Auction formats as deterministic functions of bids, configuration and a seed.

mod default;
mod samr;
mod scored;
mod sealed;
mod share;

use serde::{Deserialize, Serialize};

pub use default::resolve_default_cascade;
pub use samr::{
    run_samr, ActivityRule, Increment, RoundBid, RoundRecord, SamrAgent, SamrConfig, SamrReport,
};
pub use scored::{run_scored_sealed, ScoreWeights, ScoredAttributes, ScoredBid, ScoredOutcome};
pub use sealed::{
    resolve_sealed, run_first_price_sealed, run_vickrey_sealed, PriceRule, SealedResolution,
};
pub use share::{
    compute_payment_schedule, resolve_share, run_share_auction, EscrowedValuation, PaymentSchedule,
    ScheduleEntry, ShareAuctionResult, ShareResolution,
};

use crate::domain::{BidderId, LicenseId};
use crate::money::{Money, Share};

/// The five supported formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Fpsb,
    Vickrey,
    Scored,
    Samr,
    Share,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 5] = [
        MechanismKind::Fpsb,
        MechanismKind::Vickrey,
        MechanismKind::Scored,
        MechanismKind::Samr,
        MechanismKind::Share,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Fpsb => "fpsb",
            MechanismKind::Vickrey => "vickrey",
            MechanismKind::Scored => "scored",
            MechanismKind::Samr => "samr",
            MechanismKind::Share => "share",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        MechanismKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A bid or payment denominated either in currency or in revenue share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BidAmount {
    Money(Money),
    Share(Share),
}

impl BidAmount {
    pub fn as_money(self) -> Option<Money> {
        match self {
            BidAmount::Money(m) => Some(m),
            BidAmount::Share(_) => None,
        }
    }

    pub fn as_share(self) -> Option<Share> {
        match self {
            BidAmount::Share(s) => Some(s),
            BidAmount::Money(_) => None,
        }
    }
}

impl std::fmt::Display for BidAmount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BidAmount::Money(m) => write!(f, "{m}"),
            BidAmount::Share(s) => write!(f, "{s}"),
        }
    }
}

/// One entry of the published bid record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosedBid {
    pub bidder: BidderId,
    pub amount: BidAmount,
    /// Round number for multi-round formats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefaultRecord {
    pub bidder: BidderId,
    pub bid: Money,
    pub penalty: Money,
}

/// Result of one auction for one license.
///
/// `all_bids` lists every submitted bid exactly once, winners and losers alike,
/// so the outcome can be published in full.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub license: LicenseId,
    pub winner: Option<BidderId>,
    pub payment: Option<BidAmount>,
    pub winning_bid: Option<BidAmount>,
    pub all_bids: Vec<DisclosedBid>,
    pub rounds_used: u32,
    pub default_trace: Vec<DefaultRecord>,
    pub tie_broken: bool,
}

impl AuctionOutcome {
    pub(crate) fn unsold(
        license: LicenseId,
        all_bids: Vec<DisclosedBid>,
        rounds_used: u32,
    ) -> Self {
        AuctionOutcome {
            license,
            winner: None,
            payment: None,
            winning_bid: None,
            all_bids,
            rounds_used,
            default_trace: Vec::new(),
            tie_broken: false,
        }
    }

    pub fn is_sold(&self) -> bool {
        self.winner.is_some()
    }

    pub fn money_payment(&self) -> Option<Money> {
        self.payment.and_then(BidAmount::as_money)
    }

    pub fn share_payment(&self) -> Option<Share> {
        self.payment.and_then(BidAmount::as_share)
    }

    /// Winning bid minus payment, for money formats. This is what outsiders can
    /// compute from the published record.
    pub fn visible_rent(&self) -> Option<Money> {
        let bid = self.winning_bid?.as_money()?;
        let paid = self.money_payment()?;
        Some(bid.saturating_sub(paid))
    }

    /// Default penalties are itemized apart from the winner's payment.
    pub fn penalties_total(&self) -> Money {
        self.default_trace.iter().map(|d| d.penalty).sum()
    }
}
