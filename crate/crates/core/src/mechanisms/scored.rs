use serde::{Deserialize, Serialize};

use crate::domain::{BidderId, License, LicenseId, QualityAttributes};
use crate::error::{Error, Result};
use crate::mechanisms::sealed::validate_bids;
use crate::mechanisms::{AuctionOutcome, BidAmount, DisclosedBid};
use crate::money::Money;
use crate::ranking::{break_tie, rank_bids, Rankable};
use crate::rng::RngStream;

/// Scores closer than this are treated as equal.
const SCORE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredAttributes {
    pub license_fee: Money,
    #[serde(flatten)]
    pub quality: QualityAttributes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredBid {
    pub bidder: BidderId,
    pub license: LicenseId,
    pub attributes: Option<ScoredAttributes>,
}

impl ScoredBid {
    pub fn new(
        bidder: impl Into<BidderId>,
        license: impl Into<LicenseId>,
        attributes: ScoredAttributes,
    ) -> Self {
        ScoredBid {
            bidder: bidder.into(),
            license: license.into(),
            attributes: Some(attributes),
        }
    }
}

/// Weights on fee, rollout speed, rural coverage and indigenous content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct ScoreWeights {
    pub fee: f64,
    pub speed: f64,
    pub rural: f64,
    pub indigenous: f64,
}

impl ScoreWeights {
    /// The weighting used for India's 1995 basic-service licenses.
    pub const INDIA_BASIC_SERVICE: ScoreWeights = ScoreWeights {
        fee: 0.72,
        speed: 0.15,
        rural: 0.10,
        indigenous: 0.03,
    };

    pub fn new(fee: f64, speed: f64, rural: f64, indigenous: f64) -> Result<Self> {
        let w = ScoreWeights {
            fee,
            speed,
            rural,
            indigenous,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.fee, self.speed, self.rural, self.indigenous];
        if parts.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param(
                "weights",
                "every weight must be finite and non-negative",
            ));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param(
                "weights",
                format!("weights sum to {sum}, expected 1"),
            ));
        }
        Ok(())
    }

    fn score(&self, fee_norm: f64, q: &QualityAttributes) -> f64 {
        self.fee * fee_norm
            + self.speed * q.rollout_speed
            + self.rural * q.rural_coverage
            + self.indigenous * q.indigenous_content
    }
}

impl TryFrom<[f64; 4]> for ScoreWeights {
    type Error = Error;

    fn try_from(w: [f64; 4]) -> Result<Self> {
        ScoreWeights::new(w[0], w[1], w[2], w[3])
    }
}

impl From<ScoreWeights> for [f64; 4] {
    fn from(w: ScoreWeights) -> Self {
        [w.fee, w.speed, w.rural, w.indigenous]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredOutcome {
    pub outcome: AuctionOutcome,
    /// Score per qualifying bidder, in input order.
    pub scores: Vec<(BidderId, f64)>,
}

struct Keyed<'a> {
    bid: &'a ScoredBid,
    key: i64,
}

impl Rankable for Keyed<'_> {
    fn bidder(&self) -> &BidderId {
        &self.bid.bidder
    }
    fn license(&self) -> &LicenseId {
        &self.bid.license
    }
    fn rank_key(&self) -> i64 {
        self.key
    }
}

impl Rankable for ScoredBid {
    fn bidder(&self) -> &BidderId {
        &self.bidder
    }
    fn license(&self) -> &LicenseId {
        &self.license
    }
    fn rank_key(&self) -> i64 {
        self.attributes.map_or(0, |a| a.license_fee.cents())
    }
}

/// Weighted-score sealed bid. The fee enters as `fee / max fee`, so every
/// component lies on `[0, 1]`; the winner pays its own fee. Fees below the
/// reservation do not qualify.
pub fn run_scored_sealed(
    bids: &[ScoredBid],
    weights: ScoreWeights,
    license: &License,
    rng: &RngStream,
) -> Result<ScoredOutcome> {
    weights.validate()?;
    validate_bids(bids, license)?;
    let mut attrs = Vec::with_capacity(bids.len());
    for b in bids {
        let a = b
            .attributes
            .ok_or_else(|| Error::MissingAttributes(b.bidder.clone()))?;
        a.quality.validate()?;
        attrs.push(a);
    }
    let all_bids: Vec<DisclosedBid> = bids
        .iter()
        .zip(&attrs)
        .map(|(b, a)| DisclosedBid {
            bidder: b.bidder.clone(),
            amount: BidAmount::Money(a.license_fee),
            round: None,
        })
        .collect();

    let floor = license.floor();
    let qualifying: Vec<usize> = (0..bids.len())
        .filter(|&i| attrs[i].license_fee >= floor)
        .collect();
    let max_fee = qualifying
        .iter()
        .map(|&i| attrs[i].license_fee)
        .max()
        .unwrap_or(Money::ZERO);
    let scores: Vec<(usize, f64)> = qualifying
        .iter()
        .map(|&i| {
            let fee_norm = if max_fee.is_zero() {
                0.0
            } else {
                attrs[i].license_fee.to_f64() / max_fee.to_f64()
            };
            (i, weights.score(fee_norm, &attrs[i].quality))
        })
        .collect();
    let keyed: Vec<Keyed<'_>> = scores
        .iter()
        .map(|&(i, s)| Keyed {
            bid: &bids[i],
            key: (s / SCORE_RESOLUTION).round() as i64,
        })
        .collect();
    let ranking = rank_bids(&keyed)?;
    let score_list = scores
        .iter()
        .map(|&(i, s)| (bids[i].bidder.clone(), s))
        .collect();

    let Some(top) = ranking.top() else {
        return Ok(ScoredOutcome {
            outcome: AuctionOutcome::unsold(license.id.clone(), all_bids, 1),
            scores: score_list,
        });
    };
    let tie_stream = rng.child(license.id.as_str()).child("tie");
    let &pick = break_tie(&top.members, &tie_stream);
    let winner = scores[pick].0;
    let fee = attrs[winner].license_fee;
    Ok(ScoredOutcome {
        outcome: AuctionOutcome {
            license: license.id.clone(),
            winner: Some(bids[winner].bidder.clone()),
            payment: Some(BidAmount::Money(fee)),
            winning_bid: Some(BidAmount::Money(fee)),
            all_bids,
            rounds_used: 1,
            default_trace: Vec::new(),
            tie_broken: top.is_tie(),
        },
        scores: score_list,
    })
}
