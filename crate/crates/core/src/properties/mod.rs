//! Machine-checkable verdicts on incentive claims, and the axiom scorecard.

mod anonymity;
mod battery;
mod dominance;
mod equivalence;
mod scorecard;

pub use anonymity::{anonymity_check, AnonymityVerdict, AuctionInstance};
pub use battery::{anonymity_battery, share_auction_battery, BatteryReport, ShareBatteryReport};
pub use dominance::{
    check_no_overbid_incentive_share, check_weak_dominance, Counterexample, DominanceGrid,
    DominanceReport, ShareOverbidGrid, ShareUtilityModel, Verdict,
};
pub use equivalence::{
    revenue_equivalence_test, revenue_equivalence_test_with, RevenueEquivalenceReport,
    RevenueEquivalenceSetup,
};
pub use scorecard::{
    axiom_scorecard, summary_scorecard, third_party_rent_inflation, AxiomScorecard, FairnessCheck,
    ScorecardContext, SummaryScorecard, VisibleRent,
};
