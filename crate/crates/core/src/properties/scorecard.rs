//! Quantitative proxies for the five allocation axioms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::{AuctionOutcome, BidAmount, PaymentSchedule};
use crate::money::{Money, Share};
use crate::montecarlo::MetricsSummary;
use crate::properties::AnonymityVerdict;

/// Inputs that do not come from the outcome itself. Anything left `None`
/// is listed in the scorecard's `absences`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScorecardContext {
    /// Government's valuation of the license.
    pub v_g: Option<Money>,
    /// Set when `v_g` is a scenario assumption rather than an observed figure.
    #[serde(default)]
    pub v_g_synthetic: bool,
    pub rollout_cost: Option<Money>,
    /// Defaults to the money payment for price formats and zero for share
    /// auctions, which collect nothing up front.
    pub upfront_fee: Option<Money>,
    /// Needed to express a share auction's rent in money.
    pub pv_revenues: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessCheck {
    /// `None` when no anonymity verdict was supplied.
    pub equivariance: Option<bool>,
    pub violating_permutation: Option<Vec<usize>>,
    /// Every bid is published with its bidder, including the winner's.
    pub disclosure_complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleRent {
    /// Rent an outsider can compute from the published record.
    pub disclosed: Money,
    /// Winning share minus paid share, for share auctions.
    pub share_gap: Option<Share>,
    /// `share_gap × PV(revenues)`, known only to the winner.
    pub money_equivalent: Option<f64>,
    pub publicly_computable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomScorecard {
    pub a1_fairness: FairnessCheck,
    /// Revenue collected over `v_g`.
    pub a2_revenue_ratio: Option<f64>,
    /// Up-front fee over total rollout cost.
    pub a3_upfront_burden: Option<f64>,
    pub a4_visible_rent: Option<VisibleRent>,
    pub a5_rounds: u32,
    pub v_g_synthetic: bool,
    pub absences: Vec<String>,
}

fn disclosure_complete(outcome: &AuctionOutcome) -> bool {
    match (&outcome.winner, outcome.winning_bid) {
        (Some(w), Some(bid)) => outcome
            .all_bids
            .iter()
            .any(|b| &b.bidder == w && b.amount == bid),
        (None, None) => true,
        _ => false,
    }
}

pub fn axiom_scorecard(
    outcome: &AuctionOutcome,
    schedule: Option<&PaymentSchedule>,
    ctx: &ScorecardContext,
    anonymity: Option<&AnonymityVerdict>,
) -> AxiomScorecard {
    let mut absences = Vec::new();

    let a1_fairness = FairnessCheck {
        equivariance: anonymity.map(|v| v.pass),
        violating_permutation: anonymity.filter(|v| !v.pass).map(|v| v.permutation.clone()),
        disclosure_complete: disclosure_complete(outcome),
    };
    if anonymity.is_none() {
        absences.push("a1_equivariance: no anonymity verdict".to_string());
    }

    let is_share = matches!(outcome.payment, Some(BidAmount::Share(_)));
    let revenue = match outcome.payment {
        None => Some(Money::ZERO),
        Some(BidAmount::Money(m)) => Some(m),
        Some(BidAmount::Share(_)) => schedule.map(PaymentSchedule::total_paid),
    };
    let a2_revenue_ratio = match (revenue, ctx.v_g) {
        (Some(r), Some(v)) if !v.is_zero() => Some(r.to_f64() / v.to_f64()),
        (None, _) => {
            absences.push("a2_revenue_ratio: share payment schedule".to_string());
            None
        }
        (_, Some(_)) => {
            absences.push("a2_revenue_ratio: v_g is zero".to_string());
            None
        }
        (_, None) => {
            absences.push("a2_revenue_ratio: v_g".to_string());
            None
        }
    };

    let upfront = ctx.upfront_fee.unwrap_or_else(|| {
        if is_share {
            Money::ZERO
        } else {
            outcome.money_payment().unwrap_or(Money::ZERO)
        }
    });
    let a3_upfront_burden = match ctx.rollout_cost {
        Some(c) if !c.is_zero() => Some(upfront.to_f64() / c.to_f64()),
        Some(_) => {
            absences.push("a3_upfront_burden: rollout cost is zero".to_string());
            None
        }
        None => {
            absences.push("a3_upfront_burden: rollout_cost".to_string());
            None
        }
    };

    let a4_visible_rent = match (outcome.winning_bid, outcome.payment) {
        (Some(BidAmount::Share(won)), Some(BidAmount::Share(paid))) => {
            let gap = Share::from_micros(won.micros().saturating_sub(paid.micros()))
                .expect("difference of shares");
            if ctx.pv_revenues.is_none() {
                absences.push("a4_visible_rent.money_equivalent: pv_revenues".to_string());
            }
            Some(VisibleRent {
                disclosed: Money::ZERO,
                share_gap: Some(gap),
                money_equivalent: ctx.pv_revenues.map(|pv| gap.to_f64() * pv),
                publicly_computable: false,
            })
        }
        _ => outcome.visible_rent().map(|r| VisibleRent {
            disclosed: r,
            share_gap: None,
            money_equivalent: Some(r.to_f64()),
            publicly_computable: true,
        }),
    };

    AxiomScorecard {
        a1_fairness,
        a2_revenue_ratio,
        a3_upfront_burden,
        a4_visible_rent,
        a5_rounds: outcome.rounds_used,
        v_g_synthetic: ctx.v_g_synthetic,
        absences,
    }
}

/// Network cost after a supplier who sees the winner's rent extracts a
/// fraction `theta` of it. Share auctions disclose no money rent.
pub fn third_party_rent_inflation(
    outcome: &AuctionOutcome,
    base: Money,
    theta: f64,
) -> Result<Money> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::param("theta", format!("{theta} outside [0, 1]")));
    }
    let rent = match outcome.payment {
        Some(BidAmount::Share(_)) => Money::ZERO,
        _ => outcome.visible_rent().unwrap_or(Money::ZERO),
    };
    base.checked_add(rent.scale(theta)?)
}

/// Axiom proxies averaged over a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryScorecard {
    /// Every outcome publishes its full bid record, by construction.
    pub a1_disclosure_complete: bool,
    /// Mean revenue per license over `v_g`.
    pub a2_revenue_ratio: Option<f64>,
    /// Mean up-front fee per sold license over rollout cost.
    pub a3_upfront_burden: Option<f64>,
    pub a4_mean_visible_rent: Option<f64>,
    pub a4_publicly_computable: bool,
    pub a5_mean_rounds: f64,
    pub v_g_synthetic: bool,
    pub absences: Vec<String>,
}

pub fn summary_scorecard(
    summary: &MetricsSummary,
    v_g: Option<Money>,
    rollout_cost: Option<Money>,
) -> SummaryScorecard {
    let mut absences = Vec::new();
    let per_license = if summary.license_instances == 0 {
        0.0
    } else {
        summary.mean_revenue * summary.trials as f64 / summary.license_instances as f64
    };
    let a2_revenue_ratio = match v_g {
        Some(v) if !v.is_zero() => Some(per_license / v.to_f64()),
        _ => {
            absences.push("a2_revenue_ratio: v_g".to_string());
            None
        }
    };
    let a3_upfront_burden = match rollout_cost {
        Some(c) if !c.is_zero() => Some(summary.mean_upfront_fee / c.to_f64()),
        _ => {
            absences.push("a3_upfront_burden: rollout_cost".to_string());
            None
        }
    };
    SummaryScorecard {
        a1_disclosure_complete: true,
        a2_revenue_ratio,
        a3_upfront_burden,
        a4_mean_visible_rent: summary.mean_visible_rent,
        a4_publicly_computable: summary.mean_visible_rent.is_some(),
        a5_mean_rounds: summary.mean_rounds,
        v_g_synthetic: v_g.is_some(),
        absences,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{License, PriceBid, ShareBid};
    use crate::mechanisms::{run_share_auction, run_vickrey_sealed, EscrowedValuation};
    use crate::rng::RngStream;

    fn units(u: u32) -> Money {
        Money::from_units(u)
    }

    fn vickrey(pairs: &[(&str, u32)]) -> AuctionOutcome {
        let bids: Vec<PriceBid> = pairs
            .iter()
            .map(|&(b, a)| PriceBid::new(b, "L", units(a)))
            .collect();
        run_vickrey_sealed(&bids, &License::new("L"), &RngStream::new(0)).unwrap()
    }

    #[test]
    fn nz_scorecard() {
        let out = vickrey(&[("winner", 100_000), ("second", 6)]);
        let ctx = ScorecardContext {
            v_g: Some(units(50_000)),
            v_g_synthetic: true,
            ..Default::default()
        };
        let card = axiom_scorecard(&out, None, &ctx, None);
        assert!((card.a2_revenue_ratio.unwrap() - 0.00012).abs() < 1e-15);
        assert_eq!(
            card.a4_visible_rent.as_ref().unwrap().disclosed,
            units(99_994)
        );
        assert!(card.a4_visible_rent.unwrap().publicly_computable);
        assert_eq!(card.a5_rounds, 1);
        assert!(card.v_g_synthetic);
        assert!(card.a1_fairness.disclosure_complete);
        assert!(card.absences.iter().any(|a| a.starts_with("a3")));
        assert!(card.absences.iter().any(|a| a.starts_with("a1")));
    }

    #[test]
    fn upfront_burden_half() {
        let out = vickrey(&[("a", 60), ("b", 50)]);
        let ctx = ScorecardContext {
            rollout_cost: Some(units(100)),
            ..Default::default()
        };
        assert_eq!(
            axiom_scorecard(&out, None, &ctx, None).a3_upfront_burden,
            Some(0.5)
        );
    }

    fn share_result(v_g: u32) -> (AuctionOutcome, PaymentSchedule) {
        let lic = License::new("L");
        let bids = [
            ShareBid::new("a", "L", "0.3".parse().unwrap()),
            ShareBid::new("b", "L", "0.2".parse().unwrap()),
        ];
        let r = run_share_auction(
            &bids,
            &lic,
            EscrowedValuation::seal("L", units(v_g)),
            &[units(100); 30],
            &RngStream::new(0),
        )
        .unwrap();
        (r.outcome, r.schedule.unwrap())
    }

    #[test]
    fn share_fully_paid_ratio_is_one() {
        let (out, schedule) = share_result(100);
        assert!(schedule.complete);
        let ctx = ScorecardContext {
            v_g: Some(units(100)),
            pv_revenues: Some(942.69),
            rollout_cost: Some(units(1000)),
            ..Default::default()
        };
        let card = axiom_scorecard(&out, Some(&schedule), &ctx, None);
        assert_eq!(card.a2_revenue_ratio, Some(1.0));
        assert_eq!(card.a3_upfront_burden, Some(0.0));
        let rent = card.a4_visible_rent.unwrap();
        assert_eq!(rent.disclosed, Money::ZERO);
        assert!(!rent.publicly_computable);
        assert_eq!(rent.share_gap, Some("0.1".parse().unwrap()));
        assert!((rent.money_equivalent.unwrap() - 94.269).abs() < 1e-9);
    }

    #[test]
    fn missing_schedule_is_an_absence() {
        let (out, _) = share_result(100);
        let ctx = ScorecardContext {
            v_g: Some(units(100)),
            ..Default::default()
        };
        let card = axiom_scorecard(&out, None, &ctx, None);
        assert_eq!(card.a2_revenue_ratio, None);
        assert!(card.absences.iter().any(|a| a.contains("schedule")));
    }

    #[test]
    fn failed_equivariance_carries_permutation() {
        let out = vickrey(&[("a", 2), ("b", 1)]);
        let verdict = AnonymityVerdict {
            mechanism: crate::mechanisms::MechanismKind::Vickrey,
            pass: false,
            permutation: vec![1, 0],
            mismatches: vec!["x".into()],
        };
        let card = axiom_scorecard(&out, None, &ScorecardContext::default(), Some(&verdict));
        assert_eq!(card.a1_fairness.equivariance, Some(false));
        assert_eq!(card.a1_fairness.violating_permutation, Some(vec![1, 0]));
    }

    #[test]
    fn rent_inflation() {
        let out = vickrey(&[("a", 100), ("b", 15)]);
        assert_eq!(
            third_party_rent_inflation(&out, units(1000), 0.5).unwrap(),
            "1042.50".parse().unwrap()
        );
        assert_eq!(
            third_party_rent_inflation(&out, units(1000), 0.0).unwrap(),
            units(1000)
        );
        assert!(third_party_rent_inflation(&out, units(1000), 1.5).is_err());
        let (share_out, _) = share_result(100);
        for theta in [0.0, 0.3, 1.0] {
            assert_eq!(
                third_party_rent_inflation(&share_out, units(1000), theta).unwrap(),
                units(1000)
            );
        }
    }

    #[test]
    fn serde_round_trip() {
        let out = vickrey(&[("winner", 100_000), ("second", 6)]);
        let ctx = ScorecardContext {
            v_g: Some(units(50_000)),
            v_g_synthetic: true,
            rollout_cost: Some(units(300_000)),
            ..Default::default()
        };
        let card = axiom_scorecard(&out, None, &ctx, None);
        let json = serde_json::to_string(&card).unwrap();
        let back: AxiomScorecard = serde_json::from_str(&json).unwrap();
        assert_eq!(back, card);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
