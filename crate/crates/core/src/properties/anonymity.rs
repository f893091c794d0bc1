//! Label-permutation equivariance on tie-free profiles.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::{BidderId, License, PriceBid, ShareBid};
use crate::error::{Error, Result};
use crate::mechanisms::{
    run_first_price_sealed, run_samr, run_scored_sealed, run_share_auction, run_vickrey_sealed,
    AuctionOutcome, EscrowedValuation, MechanismKind, SamrAgent, SamrConfig, ScoreWeights,
    ScoredBid,
};
use crate::money::Money;
use crate::rng::RngStream;

/// One auction, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub enum AuctionInstance {
    Fpsb {
        license: License,
        bids: Vec<PriceBid>,
    },
    Vickrey {
        license: License,
        bids: Vec<PriceBid>,
    },
    Scored {
        license: License,
        weights: ScoreWeights,
        bids: Vec<ScoredBid>,
    },
    Samr {
        licenses: Vec<License>,
        config: SamrConfig,
        agents: Vec<SamrAgent>,
    },
    Share {
        license: License,
        bids: Vec<ShareBid>,
        v_g: Money,
        revenues: Vec<Money>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymityVerdict {
    pub mechanism: MechanismKind,
    pub pass: bool,
    /// Bidder `i` takes the label of bidder `permutation[i]`.
    pub permutation: Vec<usize>,
    /// What differed from the relabeled original, empty on a pass.
    pub mismatches: Vec<String>,
}

impl AuctionInstance {
    pub fn mechanism(&self) -> MechanismKind {
        match self {
            AuctionInstance::Fpsb { .. } => MechanismKind::Fpsb,
            AuctionInstance::Vickrey { .. } => MechanismKind::Vickrey,
            AuctionInstance::Scored { .. } => MechanismKind::Scored,
            AuctionInstance::Samr { .. } => MechanismKind::Samr,
            AuctionInstance::Share { .. } => MechanismKind::Share,
        }
    }

    fn bidder_ids(&self) -> Vec<BidderId> {
        match self {
            AuctionInstance::Fpsb { bids, .. } | AuctionInstance::Vickrey { bids, .. } => {
                bids.iter().map(|b| b.bidder.clone()).collect()
            }
            AuctionInstance::Scored { bids, .. } => bids.iter().map(|b| b.bidder.clone()).collect(),
            AuctionInstance::Samr { agents, .. } => agents.iter().map(|a| a.id.clone()).collect(),
            AuctionInstance::Share { bids, .. } => bids.iter().map(|b| b.bidder.clone()).collect(),
        }
    }

    pub fn run(&self, rng: &RngStream) -> Result<Vec<AuctionOutcome>> {
        Ok(match self {
            AuctionInstance::Fpsb { license, bids } => {
                vec![run_first_price_sealed(bids, license, rng)?]
            }
            AuctionInstance::Vickrey { license, bids } => {
                vec![run_vickrey_sealed(bids, license, rng)?]
            }
            AuctionInstance::Scored {
                license,
                weights,
                bids,
            } => {
                vec![run_scored_sealed(bids, *weights, license, rng)?.outcome]
            }
            AuctionInstance::Samr {
                licenses,
                config,
                agents,
            } => run_samr(agents, licenses, config, rng)?.outcomes,
            AuctionInstance::Share {
                license,
                bids,
                v_g,
                revenues,
            } => {
                let escrow = EscrowedValuation::seal(license.id.clone(), *v_g);
                vec![run_share_auction(bids, license, escrow, revenues, rng)?.outcome]
            }
        })
    }

    fn check_tie_free(&self, rng: &RngStream) -> Result<()> {
        fn distinct<K: std::hash::Hash + Eq>(keys: impl IntoIterator<Item = K>) -> Result<()> {
            let mut seen = HashSet::new();
            if keys.into_iter().all(|k| seen.insert(k)) {
                Ok(())
            } else {
                Err(Error::TiedProfile)
            }
        }
        match self {
            AuctionInstance::Fpsb { bids, .. } | AuctionInstance::Vickrey { bids, .. } => {
                distinct(bids.iter().map(|b| b.amount))
            }
            AuctionInstance::Share { bids, .. } => distinct(bids.iter().map(|b| b.share)),
            AuctionInstance::Scored {
                license,
                weights,
                bids,
            } => {
                let scored = run_scored_sealed(bids, *weights, license, rng)?;
                distinct(scored.scores.iter().map(|(_, s)| (s * 1e9).round() as i64))
            }
            AuctionInstance::Samr {
                licenses, agents, ..
            } => {
                for lic in licenses {
                    distinct(agents.iter().filter_map(|a| a.values.get(&lic.id)))?;
                }
                Ok(())
            }
        }
    }

    /// Bidder `i` takes the label of bidder `perm[i]`. One-shot formats also
    /// receive the bids in permuted order; the round engine keeps positions,
    /// since intermediate rounds legitimately tie and are broken by position.
    fn permuted(&self, perm: &[usize]) -> AuctionInstance {
        let ids = self.bidder_ids();
        let reorder = |i: usize| perm[i];
        match self {
            AuctionInstance::Fpsb { license, bids } => AuctionInstance::Fpsb {
                license: license.clone(),
                bids: relabel_reorder(bids, &ids, perm, reorder, |b, id| b.bidder = id),
            },
            AuctionInstance::Vickrey { license, bids } => AuctionInstance::Vickrey {
                license: license.clone(),
                bids: relabel_reorder(bids, &ids, perm, reorder, |b, id| b.bidder = id),
            },
            AuctionInstance::Scored {
                license,
                weights,
                bids,
            } => AuctionInstance::Scored {
                license: license.clone(),
                weights: *weights,
                bids: relabel_reorder(bids, &ids, perm, reorder, |b, id| b.bidder = id),
            },
            AuctionInstance::Share {
                license,
                bids,
                v_g,
                revenues,
            } => AuctionInstance::Share {
                license: license.clone(),
                bids: relabel_reorder(bids, &ids, perm, reorder, |b, id| b.bidder = id),
                v_g: *v_g,
                revenues: revenues.clone(),
            },
            AuctionInstance::Samr {
                licenses,
                config,
                agents,
            } => AuctionInstance::Samr {
                licenses: licenses.clone(),
                config: *config,
                agents: relabel_reorder(agents, &ids, perm, |i| i, |a, id| a.id = id),
            },
        }
    }
}

/// Position `j` of the result holds input `order(j)`, relabeled.
fn relabel_reorder<T: Clone>(
    items: &[T],
    ids: &[BidderId],
    perm: &[usize],
    order: impl Fn(usize) -> usize,
    set_id: impl Fn(&mut T, BidderId),
) -> Vec<T> {
    (0..items.len())
        .map(|j| {
            let i = order(j);
            let mut item = items[i].clone();
            set_id(&mut item, ids[perm[i]].clone());
            item
        })
        .collect()
}

fn relabeled(outcome: &AuctionOutcome, map: &BTreeMap<BidderId, BidderId>) -> AuctionOutcome {
    let swap = |id: &BidderId| map.get(id).cloned().unwrap_or_else(|| id.clone());
    let mut out = outcome.clone();
    out.winner = out.winner.as_ref().map(swap);
    for b in &mut out.all_bids {
        b.bidder = swap(&b.bidder);
    }
    for d in &mut out.default_trace {
        d.bidder = swap(&d.bidder);
    }
    out
}

/// Bid record compared as a multiset, since one-shot formats see a reordered input.
fn canonical(mut outcome: AuctionOutcome) -> AuctionOutcome {
    outcome
        .all_bids
        .sort_by(|a, b| (a.round, &a.bidder).cmp(&(b.round, &b.bidder)));
    outcome
}

/// Runs `instance`, then runs it again with bidder labels permuted, and
/// checks the second outcome is the first with labels permuted.
///
/// Profiles with tied bids are rejected: tie-break randomness is exempt.
pub fn anonymity_check(
    instance: &AuctionInstance,
    permutation: &[usize],
    rng: &RngStream,
) -> Result<AnonymityVerdict> {
    let ids = instance.bidder_ids();
    let mut sorted = permutation.to_vec();
    sorted.sort_unstable();
    if sorted != (0..ids.len()).collect::<Vec<_>>() {
        return Err(Error::param(
            "permutation",
            format!(
                "{permutation:?} is not a permutation of {} bidders",
                ids.len()
            ),
        ));
    }
    instance.check_tie_free(rng)?;

    let map: BTreeMap<BidderId, BidderId> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), ids[permutation[i]].clone()))
        .collect();
    let expected: Vec<AuctionOutcome> = instance
        .run(rng)?
        .iter()
        .map(|o| canonical(relabeled(o, &map)))
        .collect();
    let actual: Vec<AuctionOutcome> = instance
        .permuted(permutation)
        .run(rng)?
        .into_iter()
        .map(canonical)
        .collect();

    let mut mismatches = Vec::new();
    for (e, a) in expected.iter().zip(&actual) {
        if e.winner != a.winner {
            mismatches.push(format!(
                "{}: winner {:?} expected {:?}",
                e.license, a.winner, e.winner
            ));
        }
        if e.payment != a.payment {
            mismatches.push(format!(
                "{}: payment {:?} expected {:?}",
                e.license, a.payment, e.payment
            ));
        }
        if e.winning_bid != a.winning_bid {
            mismatches.push(format!(
                "{}: winning bid {:?} expected {:?}",
                e.license, a.winning_bid, e.winning_bid
            ));
        }
        if e.all_bids != a.all_bids {
            mismatches.push(format!("{}: published bids differ", e.license));
        }
        if e.rounds_used != a.rounds_used {
            mismatches.push(format!(
                "{}: rounds {} expected {}",
                e.license, a.rounds_used, e.rounds_used
            ));
        }
    }
    if expected.len() != actual.len() {
        mismatches.push(format!(
            "{} outcomes, expected {}",
            actual.len(),
            expected.len()
        ));
    }
    Ok(AnonymityVerdict {
        mechanism: instance.mechanism(),
        pass: mismatches.is_empty(),
        permutation: permutation.to_vec(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn price_bids(pairs: &[(&str, u32)]) -> Vec<PriceBid> {
        pairs
            .iter()
            .map(|&(b, a)| PriceBid::new(b, "L", Money::from_units(a)))
            .collect()
    }

    #[test]
    fn vickrey_swap_moves_winner_keeps_price() {
        let inst = AuctionInstance::Vickrey {
            license: License::new("L"),
            bids: price_bids(&[("A", 10), ("B", 20)]),
        };
        let rng = RngStream::new(1);
        let v = anonymity_check(&inst, &[1, 0], &rng).unwrap();
        assert!(v.pass, "{:?}", v.mismatches);
        let swapped = inst.permuted(&[1, 0]).run(&rng).unwrap();
        assert_eq!(swapped[0].winner, Some(BidderId::from("A")));
        assert_eq!(swapped[0].money_payment(), Some(Money::from_units(10)));
    }

    #[test]
    fn identity_permutation_is_trivial() {
        let inst = AuctionInstance::Fpsb {
            license: License::new("L"),
            bids: price_bids(&[("A", 3), ("B", 9), ("C", 5)]),
        };
        assert!(
            anonymity_check(&inst, &[0, 1, 2], &RngStream::new(0))
                .unwrap()
                .pass
        );
    }

    #[test]
    fn ties_are_rejected() {
        let inst = AuctionInstance::Fpsb {
            license: License::new("L"),
            bids: price_bids(&[("A", 9), ("B", 9)]),
        };
        assert_eq!(
            anonymity_check(&inst, &[1, 0], &RngStream::new(0)),
            Err(Error::TiedProfile)
        );
    }

    #[test]
    fn bad_permutation_is_rejected() {
        let inst = AuctionInstance::Fpsb {
            license: License::new("L"),
            bids: price_bids(&[("A", 1), ("B", 2)]),
        };
        assert!(anonymity_check(&inst, &[0, 0], &RngStream::new(0)).is_err());
        assert!(anonymity_check(&inst, &[0], &RngStream::new(0)).is_err());
    }

    #[test]
    fn samr_three_agents_rotation() {
        let inst = AuctionInstance::Samr {
            licenses: vec![License::new("L1"), License::new("L2")],
            config: SamrConfig::with_increment(Money::from_units(5)),
            agents: vec![
                SamrAgent::new("x")
                    .value("L1", Money::from_units(90))
                    .value("L2", Money::from_units(40)),
                SamrAgent::new("y")
                    .value("L1", Money::from_units(70))
                    .value("L2", Money::from_units(65)),
                SamrAgent::new("z")
                    .value("L1", Money::from_units(50))
                    .value("L2", Money::from_units(80)),
            ],
        };
        for seed in 0..10 {
            let v = anonymity_check(&inst, &[2, 0, 1], &RngStream::new(seed)).unwrap();
            assert!(v.pass, "{:?}", v.mismatches);
        }
    }
}
