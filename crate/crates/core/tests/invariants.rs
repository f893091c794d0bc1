//! Property tests over random profiles.

use std::collections::BTreeMap;

use auctionlab::agents::{
    budget_constrained_bid, certainty_equivalent_bid, common_value_bid, share_backout,
    CashFlowForecast, CommonValueMode, ExpectedMaxTable, ValueDistribution,
};
use auctionlab::mechanisms::{
    compute_payment_schedule, run_first_price_sealed, run_samr, run_share_auction,
    run_vickrey_sealed, EscrowedValuation, SamrAgent, SamrConfig,
};
use auctionlab::ranking::rank_bids;
use auctionlab::{BidderId, License, Money, PriceBid, RngStream, Share, ShareBid};
use proptest::prelude::*;

fn money() -> impl Strategy<Value = Money> {
    (0i64..10_000_000).prop_map(|c| Money::from_cents(c).unwrap())
}

fn price_bids(max: usize) -> impl Strategy<Value = Vec<PriceBid>> {
    prop::collection::vec(money(), 1..max).prop_map(|amounts| {
        amounts
            .into_iter()
            .enumerate()
            .map(|(i, a)| PriceBid::new(format!("b{i}"), "L", a))
            .collect()
    })
}

proptest! {
    #[test]
    fn money_addition_associates(a in money(), b in money(), c in money()) {
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a.checked_add(b).unwrap().checked_sub(b).unwrap(), a);
    }

    #[test]
    fn ranking_ignores_submission_order(bids in price_bids(8), seed in any::<u64>()) {
        let mut shuffled = bids.clone();
        let mut rng = RngStream::new(seed).rng();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        let key = |bs: &[PriceBid]| -> Vec<Vec<(BidderId, Money)>> {
            rank_bids(bs).unwrap().groups.iter().map(|g| {
                let mut members: Vec<_> = g.members.iter().map(|&i| (bs[i].bidder.clone(), bs[i].amount)).collect();
                members.sort();
                members
            }).collect()
        };
        prop_assert_eq!(key(&bids), key(&shuffled));
    }

    #[test]
    fn sealed_winners_are_efficient(bids in price_bids(8), seed in any::<u64>()) {
        let license = License::new("L");
        let top = bids.iter().map(|b| b.amount).max().unwrap();
        for out in [
            run_first_price_sealed(&bids, &license, &RngStream::new(seed)).unwrap(),
            run_vickrey_sealed(&bids, &license, &RngStream::new(seed)).unwrap(),
        ] {
            let winner = out.winner.clone().unwrap();
            let wb = bids.iter().find(|b| b.bidder == winner).unwrap();
            prop_assert_eq!(wb.amount, top);
            prop_assert!(out.money_payment().unwrap() <= wb.amount);
            prop_assert_eq!(out.all_bids.len(), bids.len());
        }
    }

    #[test]
    fn samr_standing_price_never_falls(
        values in prop::collection::vec((1u32..200, 1u32..200), 2..5),
        inc in 1u32..20,
        seed in any::<u64>(),
    ) {
        let licenses = [License::new("L1"), License::new("L2")];
        let agents: Vec<SamrAgent> = values.iter().enumerate().map(|(i, &(a, b))| {
            SamrAgent::new(format!("a{i}")).value("L1", Money::from_units(a)).value("L2", Money::from_units(b))
        }).collect();
        let config = SamrConfig::with_increment(Money::from_units(inc));
        let r = run_samr(&agents, &licenses, &config, &RngStream::new(seed)).unwrap();
        prop_assert!(r.terminated);
        let mut last = [Money::ZERO; 2];
        for round in &r.round_log {
            for (li, s) in round.standing.iter().enumerate() {
                if let Some((_, p)) = s {
                    prop_assert!(*p >= last[li]);
                    last[li] = *p;
                }
            }
        }
        // Each round with a bid raises some license by at least one increment.
        let top = values.iter().map(|&(a, b)| a.max(b)).max().unwrap();
        prop_assert!(r.rounds_used <= 2 * (top / inc + 1) + 1);
        for out in &r.outcomes {
            if let Some(w) = &out.winner {
                let agent = agents.iter().find(|a| &a.id == w).unwrap();
                prop_assert!(out.money_payment().unwrap() <= agent.values[&out.license]);
            }
        }
    }

    #[test]
    fn schedule_cumulative_invariant(
        micros in 0u32..=1_000_000,
        revenues in prop::collection::vec(0i64..1_000_000, 0..40),
        v_g in 0i64..5_000_000,
    ) {
        let share = Share::from_micros(micros).unwrap();
        let revenues: Vec<Money> = revenues.into_iter().map(|c| Money::from_cents(c).unwrap()).collect();
        let v_g = Money::from_cents(v_g).unwrap();
        let s = compute_payment_schedule(share, &revenues, v_g);
        let mut cum_rev = Money::ZERO;
        for (entry, cum) in s.entries.iter().zip(s.cumulative()) {
            cum_rev = cum_rev + entry.revenue;
            prop_assert_eq!(cum, v_g.min(share.of(cum_rev)));
        }
        prop_assert!(s.total_paid() <= v_g);
        prop_assert_eq!(s.complete, s.total_paid() == v_g);
    }

    #[test]
    fn share_winner_has_max_share_and_pays_second(
        shares in prop::collection::vec(0u32..=1_000_000, 1..8),
        seed in any::<u64>(),
    ) {
        let license = License::new("L");
        let bids: Vec<ShareBid> = shares.iter().enumerate()
            .map(|(i, &m)| ShareBid::new(format!("b{i}"), "L", Share::from_micros(m).unwrap())).collect();
        let r = run_share_auction(&bids, &license, EscrowedValuation::seal("L", Money::from_units(100)),
            &[Money::from_units(100); 5], &RngStream::new(seed)).unwrap();
        let mut sorted = shares.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let w = r.outcome.winner.clone().unwrap();
        let wb = bids.iter().find(|b| b.bidder == w).unwrap();
        prop_assert_eq!(wb.share.micros(), sorted[0]);
        prop_assert_eq!(r.outcome.share_payment().unwrap().micros(), sorted.get(1).copied().unwrap_or(0));
    }

    #[test]
    fn certainty_equivalent_below_mean_and_falling(mean in 1.0f64..1000.0, sd in 0.1f64..50.0, a in 0.01f64..2.0) {
        let d = ValueDistribution::Normal { mean, sd };
        let lo = certainty_equivalent_bid(&d, a).unwrap();
        let hi = certainty_equivalent_bid(&d, a * 1.5).unwrap();
        let mean_bid = Money::from_f64(mean).unwrap();
        prop_assert!(lo <= mean_bid);
        // Strict once the premium a·sd²/2 is visible at cent resolution.
        if a * sd * sd / 2.0 >= 0.01 {
            prop_assert!(lo < mean_bid);
        }
        prop_assert!(hi <= lo);
    }

    #[test]
    fn corrected_never_exceeds_naive(signal in money(), n in 1usize..12, sigma in 0.0f64..100.0) {
        let t = ExpectedMaxTable::shared();
        let naive = common_value_bid(signal, CommonValueMode::Naive, n, sigma, t).unwrap();
        let corrected = common_value_bid(signal, CommonValueMode::Corrected, n, sigma, t).unwrap();
        prop_assert!(corrected <= naive);
    }

    #[test]
    fn backout_is_scale_invariant(rev in 1u32..10_000, cost_pct in 0u32..150, k in 2u32..50, rate in 0.0f64..0.3) {
        let cost = rev * cost_pct / 100;
        let base = share_backout(&CashFlowForecast::flat(30, Money::from_units(rev), Money::from_units(cost), rate)).unwrap();
        let scaled = share_backout(&CashFlowForecast::flat(30, Money::from_units(rev * k), Money::from_units(cost * k), rate)).unwrap();
        prop_assert!(base.micros().abs_diff(scaled.micros()) <= 1);
    }

    #[test]
    fn budget_caps_bids(value in money(), budget in money()) {
        let bid = budget_constrained_bid(value, budget);
        prop_assert!(bid <= value && bid <= budget);
    }
}

#[test]
fn default_cascade_without_defaults_is_identity() {
    let license = License::new("L");
    let bids = [
        PriceBid::new("a", "L", Money::from_units(5)),
        PriceBid::new("b", "L", Money::from_units(3)),
    ];
    let out = run_first_price_sealed(&bids, &license, &RngStream::new(0)).unwrap();
    let same =
        auctionlab::mechanisms::resolve_default_cascade(&out, &BTreeMap::new(), 0.1, &license)
            .unwrap();
    assert_eq!(same, out);
}
