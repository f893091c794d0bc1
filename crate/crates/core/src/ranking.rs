//! Winner and runner-up determination shared by all mechanisms.

use rand::Rng;

use crate::domain::{BidderId, LicenseId, PriceBid, ShareBid};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Anything that can be ordered by a single exact integer key.
pub trait Rankable {
    fn bidder(&self) -> &BidderId;
    fn license(&self) -> &LicenseId;
    /// Larger is better. Money ranks by cents, shares by millionths.
    fn rank_key(&self) -> i64;
}

impl Rankable for PriceBid {
    fn bidder(&self) -> &BidderId {
        &self.bidder
    }
    fn license(&self) -> &LicenseId {
        &self.license
    }
    fn rank_key(&self) -> i64 {
        self.amount.cents()
    }
}

impl Rankable for ShareBid {
    fn bidder(&self) -> &BidderId {
        &self.bidder
    }
    fn license(&self) -> &LicenseId {
        &self.license
    }
    fn rank_key(&self) -> i64 {
        i64::from(self.share.micros())
    }
}

/// Bids sharing one key. `members` are indices into the ranked input, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieGroup {
    pub key: i64,
    pub members: Vec<usize>,
}

impl TieGroup {
    pub fn is_tie(&self) -> bool {
        self.members.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ranking {
    pub groups: Vec<TieGroup>,
}

impl Ranking {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn top(&self) -> Option<&TieGroup> {
        self.groups.first()
    }

    /// Input indices from best to worst; ties keep input order.
    pub fn order(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().flat_map(|g| g.members.iter().copied())
    }

    pub fn has_ties(&self) -> bool {
        self.groups.iter().any(TieGroup::is_tie)
    }
}

/// Orders bids for one license from highest to lowest, grouping equal keys.
pub fn rank_bids<B: Rankable>(bids: &[B]) -> Result<Ranking> {
    let Some(first) = bids.first() else {
        return Ok(Ranking::default());
    };
    if let Some(other) = bids.iter().find(|b| b.license() != first.license()) {
        return Err(Error::MixedLicenses {
            first: first.license().clone(),
            other: other.license().clone(),
        });
    }
    let mut idx: Vec<usize> = (0..bids.len()).collect();
    // stable sort keeps input order inside each tie
    idx.sort_by(|&a, &b| bids[b].rank_key().cmp(&bids[a].rank_key()));
    let mut groups: Vec<TieGroup> = Vec::new();
    for i in idx {
        let key = bids[i].rank_key();
        match groups.last_mut() {
            Some(g) if g.key == key => g.members.push(i),
            _ => groups.push(TieGroup {
                key,
                members: vec![i],
            }),
        }
    }
    Ok(Ranking { groups })
}

/// Uniform pick from a non-empty tie group.
///
/// Callers pass a stream already derived for `(license, "tie")`, so the choice
/// is fixed by the master seed. Singletons consume no randomness.
pub fn break_tie<'a, T>(group: &'a [T], stream: &RngStream) -> &'a T {
    assert!(!group.is_empty(), "break_tie on an empty group");
    if group.len() == 1 {
        return &group[0];
    }
    let pick = stream.rng().random_range(0..group.len());
    &group[pick]
}
