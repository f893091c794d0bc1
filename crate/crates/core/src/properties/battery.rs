//! Seeded batteries of random profiles for the anonymity and share-auction checks.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{License, PriceBid, QualityAttributes, ShareBid};
use crate::error::{Error, Result};
use crate::mechanisms::{
    compute_payment_schedule, run_share_auction, EscrowedValuation, MechanismKind, SamrAgent,
    SamrConfig, ScoreWeights, ScoredAttributes, ScoredBid,
};
use crate::money::{Money, Share};
use crate::properties::{anonymity_check, AnonymityVerdict, AuctionInstance};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub mechanism: MechanismKind,
    pub profiles: usize,
    pub passed: usize,
    /// Up to ten failing verdicts, in profile order.
    pub failures: Vec<AnonymityVerdict>,
}

impl BatteryReport {
    pub fn pass(&self) -> bool {
        self.passed == self.profiles
    }
}

fn distinct_cents<R: Rng>(rng: &mut R, n: usize, max: i64) -> Vec<Money> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = rng.random_range(0..max);
        if seen.insert(c) {
            out.push(Money::from_cents(c).expect("non-negative"));
        }
    }
    out
}

fn random_instance<R: Rng>(mechanism: MechanismKind, rng: &mut R) -> AuctionInstance {
    let n = rng.random_range(2..=5);
    let license = License::new("L");
    match mechanism {
        MechanismKind::Fpsb | MechanismKind::Vickrey => {
            let bids = distinct_cents(rng, n, 100_000)
                .into_iter()
                .enumerate()
                .map(|(i, a)| PriceBid::new(format!("b{i}"), "L", a))
                .collect();
            if mechanism == MechanismKind::Fpsb {
                AuctionInstance::Fpsb { license, bids }
            } else {
                AuctionInstance::Vickrey { license, bids }
            }
        }
        MechanismKind::Scored => {
            let fees = distinct_cents(rng, n, 100_000);
            let bids = fees
                .into_iter()
                .enumerate()
                .map(|(i, fee)| {
                    let quality = QualityAttributes {
                        rollout_speed: rng.random(),
                        rural_coverage: rng.random(),
                        indigenous_content: rng.random(),
                    };
                    ScoredBid::new(
                        format!("b{i}"),
                        "L",
                        ScoredAttributes {
                            license_fee: fee,
                            quality,
                        },
                    )
                })
                .collect();
            AuctionInstance::Scored {
                license,
                weights: ScoreWeights::INDIA_BASIC_SERVICE,
                bids,
            }
        }
        MechanismKind::Samr => {
            let agents_n = 3;
            let licenses: Vec<License> = (0..rng.random_range(1..=3))
                .map(|l| License::new(format!("L{l}")))
                .collect();
            let mut agents: Vec<SamrAgent> = (0..agents_n)
                .map(|i| SamrAgent::new(format!("a{i}")))
                .collect();
            for lic in &licenses {
                let values = distinct_cents(rng, agents_n, 20_000);
                for (agent, v) in agents.iter_mut().zip(values) {
                    agent.values.insert(lic.id.clone(), v);
                }
            }
            let inc = Money::from_cents(rng.random_range(100..=1_000)).expect("positive");
            AuctionInstance::Samr {
                licenses,
                config: SamrConfig::with_increment(inc),
                agents,
            }
        }
        MechanismKind::Share => {
            let mut seen = HashSet::new();
            let mut bids = Vec::with_capacity(n);
            while bids.len() < n {
                let m = rng.random_range(0..=1_000_000u32);
                if seen.insert(m) {
                    let share = Share::from_micros(m).expect("in range");
                    bids.push(ShareBid::new(format!("b{}", bids.len()), "L", share));
                }
            }
            AuctionInstance::Share {
                license,
                bids,
                v_g: Money::from_units(rng.random_range(0..=5_000)),
                revenues: vec![Money::from_units(rng.random_range(0..=1_000)); 10],
            }
        }
    }
}

/// Checks `profiles` random tie-free profiles of `mechanism`, each under a
/// random permutation of its bidders.
pub fn anonymity_battery(
    mechanism: MechanismKind,
    profiles: usize,
    seed: u64,
) -> Result<BatteryReport> {
    let root = RngStream::new(seed)
        .child("anonymity")
        .child(mechanism.name());
    let mut passed = 0;
    let mut failures = Vec::new();
    for k in 0..profiles as u64 {
        let stream = root.index(k);
        let mut rng = stream.child("profile").rng();
        // Resample the rare profile whose scores tie.
        let verdict = loop {
            let instance = random_instance(mechanism, &mut rng);
            let n = match &instance {
                AuctionInstance::Fpsb { bids, .. } | AuctionInstance::Vickrey { bids, .. } => {
                    bids.len()
                }
                AuctionInstance::Scored { bids, .. } => bids.len(),
                AuctionInstance::Samr { agents, .. } => agents.len(),
                AuctionInstance::Share { bids, .. } => bids.len(),
            };
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            match anonymity_check(&instance, &perm, &stream.child("run")) {
                Err(Error::TiedProfile) => continue,
                other => break other?,
            }
        };
        if verdict.pass {
            passed += 1;
        } else if failures.len() < 10 {
            failures.push(verdict);
        }
    }
    Ok(BatteryReport {
        mechanism,
        profiles,
        passed,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareBatteryReport {
    pub profiles: usize,
    /// Winner holds a maximal share and pays the second-highest share.
    pub allocation_passed: usize,
    /// Cumulative payments equal `min(v_g, share × cumulative revenue)` every period.
    pub schedule_passed: usize,
    pub failures: Vec<String>,
}

impl ShareBatteryReport {
    pub fn pass(&self) -> bool {
        self.allocation_passed == self.profiles && self.schedule_passed == self.profiles
    }
}

/// Random share-auction profiles, ties allowed, with random revenue streams
/// and escrowed valuations.
pub fn share_auction_battery(profiles: usize, seed: u64) -> Result<ShareBatteryReport> {
    let root = RngStream::new(seed).child("share-battery");
    let license = License::new("L");
    let mut report = ShareBatteryReport {
        profiles,
        allocation_passed: 0,
        schedule_passed: 0,
        failures: Vec::new(),
    };
    for k in 0..profiles as u64 {
        let mut rng = root.index(k).child("profile").rng();
        let n = rng.random_range(1..=6);
        // A coarse grid makes ties common.
        let shares: Vec<u32> = (0..n).map(|_| rng.random_range(0..=20) * 50_000).collect();
        let bids: Vec<ShareBid> = shares
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                ShareBid::new(format!("b{i}"), "L", Share::from_micros(m).expect("grid"))
            })
            .collect();
        let periods = rng.random_range(1..=40);
        let revenues: Vec<Money> = (0..periods)
            .map(|_| Money::from_cents(rng.random_range(0..10_000_000)).expect("non-negative"))
            .collect();
        let v_g = Money::from_cents(rng.random_range(0..50_000_000)).expect("non-negative");
        let result = run_share_auction(
            &bids,
            &license,
            EscrowedValuation::seal("L", v_g),
            &revenues,
            &root.index(k).child("run"),
        )?;

        let mut sorted = shares.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let expected_paid = sorted.get(1).copied().unwrap_or(0);
        let out = &result.outcome;
        let winner_share = out
            .winner
            .as_ref()
            .and_then(|w| bids.iter().find(|b| &b.bidder == w))
            .map(|b| b.share.micros());
        let paid = out.share_payment().map(Share::micros);
        if winner_share == Some(sorted[0]) && paid == Some(expected_paid) {
            report.allocation_passed += 1;
        } else {
            report.failures.push(format!(
                "profile {k}: shares {shares:?}, winner share {winner_share:?}, paid {paid:?}"
            ));
        }

        let paid_share = Share::from_micros(expected_paid).expect("grid");
        let schedule = result
            .schedule
            .unwrap_or_else(|| compute_payment_schedule(paid_share, &revenues, v_g));
        let mut cum_rev = Money::ZERO;
        // Payments stop once v_g is reached.
        let mut ok = schedule.entries.len() == revenues.len() || schedule.complete;
        for (entry, cum) in schedule.entries.iter().zip(schedule.cumulative()) {
            cum_rev = cum_rev.checked_add(entry.revenue)?;
            ok &= cum == v_g.min(paid_share.of(cum_rev));
        }
        if ok {
            report.schedule_passed += 1;
        } else {
            report.failures.push(format!(
                "profile {k}: schedule breaks the cumulative invariant"
            ));
        }
    }
    Ok(report)
}
