use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{
    budget_constrained_bid, certainty_equivalent_bid, common_value_bid, equilibrium_fpsb_bid,
    shaded_bid, CommonValueMode, ExpectedMaxTable,
};
use crate::domain::{BidderProfile, PriceBid, ShareBid, Strategy, ValueModel};
use crate::error::{Error, Result};
use crate::mechanisms::{
    run_first_price_sealed, run_samr, run_scored_sealed, run_share_auction, run_vickrey_sealed,
    AuctionOutcome, EscrowedValuation, MechanismKind, PaymentSchedule, SamrAgent, ScoredAttributes,
    ScoredBid,
};
use crate::money::{Money, Share};
use crate::montecarlo::scenario::{Scenario, ValueSetting};
use crate::rng::RngStream;

/// How the winner settles, for surplus purposes.
#[derive(Debug, Clone, Copy)]
pub enum Settlement<'a> {
    Price,
    /// Share payments are valued at their present value at `rate`.
    Share {
        schedule: &'a PaymentSchedule,
        rate: f64,
    },
}

/// Present value the winner gives up through share payments, as a negative amount.
pub fn share_payment_component(schedule: &PaymentSchedule, rate: f64) -> f64 {
    -schedule.present_value(rate)
}

/// `realized_value − payment`, or `None` for an unsold license.
pub fn winner_surplus(
    outcome: &AuctionOutcome,
    realized_value: Money,
    settlement: Settlement<'_>,
) -> Option<f64> {
    outcome.winner.as_ref()?;
    match settlement {
        Settlement::Price => {
            let paid = outcome.money_payment()?;
            Some(realized_value.to_f64() - paid.to_f64())
        }
        Settlement::Share { schedule, rate } => {
            Some(realized_value.to_f64() + share_payment_component(schedule, rate))
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default pool, `Some(1)` runs serially.
    pub threads: Option<usize>,
    pub keep_log: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LicenseRecord {
    pub license: String,
    pub winner: Option<String>,
    /// Money payment, or present value of share payments.
    pub payment: Option<f64>,
    /// Nominal amount the auctioneer collects.
    pub revenue: f64,
    pub winning_bid: Option<f64>,
    pub realized_value: Option<f64>,
    pub surplus: Option<f64>,
    pub efficient: bool,
    pub cursed: bool,
    /// Publicly computable rent; `None` for share outcomes.
    pub visible_rent: Option<f64>,
    pub upfront_fee: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub revenue: f64,
    pub rounds: u32,
    pub licenses: Vec<LicenseRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub mechanism: MechanismKind,
    pub trials: u64,
    pub license_instances: u64,
    pub sold_instances: u64,
    pub mean_revenue: f64,
    pub revenue_se: f64,
    pub efficiency_rate: f64,
    pub winners_curse_rate: f64,
    pub mean_winner_surplus: f64,
    pub winner_surplus_se: f64,
    pub mean_rounds: f64,
    pub unsold_rate: f64,
    pub mean_upfront_fee: f64,
    /// `None` when rents are not publicly computable (share auction).
    pub mean_visible_rent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub summary: MetricsSummary,
    pub log: Option<Vec<TrialRecord>>,
}

/// Runs every trial of `scenario`. Trial `t` draws only from the stream
/// `(seed, "trial", t)`, and records are reduced in trial order, so the result
/// does not depend on thread count.
pub fn run_trials(scenario: &Scenario, seed: u64, options: RunOptions) -> Result<TrialReport> {
    scenario.check()?;
    let master = RngStream::new(seed).child("trial");
    let run = |t: u64| run_one(scenario, &master.index(t), t);
    let records: Vec<TrialRecord> = match options.threads {
        Some(1) => (0..scenario.trials).map(run).collect::<Result<_>>()?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?;
            pool.install(|| {
                (0..scenario.trials)
                    .into_par_iter()
                    .map(run)
                    .collect::<Result<_>>()
            })?
        }
        None => (0..scenario.trials)
            .into_par_iter()
            .map(run)
            .collect::<Result<_>>()?,
    };
    let summary = summarize(scenario.mechanism, &records);
    Ok(TrialReport {
        summary,
        log: options.keep_log.then_some(records),
    })
}

struct Draw {
    realized: Money,
    bid: Money,
}

fn draw_bidder(
    profile: &BidderProfile,
    n: usize,
    common_value: Option<f64>,
    stream: &RngStream,
) -> Result<Draw> {
    let mut rng = stream.rng();
    let (realized, perceived) = match &profile.value {
        ValueModel::Point(m) => (*m, *m),
        ValueModel::Distribution(d) => {
            let v = Money::from_f64_clamped(d.sample(&mut rng));
            (v, v)
        }
        ValueModel::CommonSignal { noise_sd } => {
            let common = common_value
                .ok_or_else(|| Error::param("values", "common signal without a common value"))?;
            let noise = rand_distr::Normal::new(0.0, *noise_sd)
                .map_err(|e| Error::param("noise_sd", e.to_string()))?;
            let signal = common + rand_distr::Distribution::sample(&noise, &mut rng);
            (
                Money::from_f64_clamped(common),
                Money::from_f64_clamped(signal),
            )
        }
    };
    let noise_sd = match profile.value {
        ValueModel::CommonSignal { noise_sd } => noise_sd,
        _ => 0.0,
    };
    let bid = match profile.strategy {
        Strategy::Truthful => perceived,
        Strategy::Shaded { gamma } => shaded_bid(perceived, gamma)?,
        Strategy::EquilibriumFpsb => {
            Money::from_f64_clamped(equilibrium_fpsb_bid(perceived.to_f64(), n)?)
        }
        Strategy::BudgetConstrained => perceived,
        Strategy::CertaintyEquivalent => match &profile.value {
            ValueModel::Distribution(d) => certainty_equivalent_bid(d, profile.risk_coefficient)?,
            _ => perceived,
        },
        Strategy::CommonValueNaive => common_value_bid(
            perceived,
            CommonValueMode::Naive,
            n,
            noise_sd,
            ExpectedMaxTable::shared(),
        )?,
        Strategy::CommonValueCorrected => common_value_bid(
            perceived,
            CommonValueMode::Corrected,
            n,
            noise_sd,
            ExpectedMaxTable::shared(),
        )?,
    };
    let bid = match profile.budget {
        Some(budget) => budget_constrained_bid(bid, budget),
        None => bid,
    };
    Ok(Draw { realized, bid })
}

fn run_one(scenario: &Scenario, trial: &RngStream, t: u64) -> Result<TrialRecord> {
    let n = scenario.bidders.len();
    // draws[license][bidder]
    let mut draws: Vec<Vec<Draw>> = Vec::with_capacity(scenario.licenses.len());
    for lic in &scenario.licenses {
        let lic_stream = trial.child(lic.id.as_str());
        let common = match &scenario.metrics.values {
            ValueSetting::Private => None,
            ValueSetting::Common(d) => Some(d.sample(&mut lic_stream.child("common").rng())),
        };
        let row = scenario
            .bidders
            .iter()
            .enumerate()
            .map(|(i, p)| draw_bidder(p, n, common, &lic_stream.child("bidder").index(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        draws.push(row);
    }

    let mech_stream = trial.child("mechanism");
    let mut records = Vec::with_capacity(scenario.licenses.len());
    let mut rounds = 1;
    match scenario.mechanism {
        MechanismKind::Fpsb | MechanismKind::Vickrey | MechanismKind::Scored => {
            for (lic, row) in scenario.licenses.iter().zip(&draws) {
                let outcome = match scenario.mechanism {
                    MechanismKind::Scored => {
                        let weights = scenario.config.scored.as_ref().expect("validated").weights;
                        let bids: Vec<ScoredBid> = scenario
                            .bidders
                            .iter()
                            .zip(row)
                            .map(|(p, d)| {
                                ScoredBid::new(
                                    p.id.clone(),
                                    lic.id.clone(),
                                    ScoredAttributes {
                                        license_fee: d.bid,
                                        quality: p.attributes.unwrap_or_default(),
                                    },
                                )
                            })
                            .collect();
                        run_scored_sealed(&bids, weights, lic, &mech_stream)?.outcome
                    }
                    kind => {
                        let bids: Vec<PriceBid> = scenario
                            .bidders
                            .iter()
                            .zip(row)
                            .map(|(p, d)| PriceBid::new(p.id.clone(), lic.id.clone(), d.bid))
                            .collect();
                        if kind == MechanismKind::Fpsb {
                            run_first_price_sealed(&bids, lic, &mech_stream)?
                        } else {
                            run_vickrey_sealed(&bids, lic, &mech_stream)?
                        }
                    }
                };
                records.push(price_record(scenario, &outcome, row));
            }
        }
        MechanismKind::Samr => {
            let config = scenario.config.samr.as_ref().expect("validated");
            let agents: Vec<SamrAgent> = scenario
                .bidders
                .iter()
                .enumerate()
                .map(|(i, p)| SamrAgent {
                    id: p.id.clone(),
                    values: scenario
                        .licenses
                        .iter()
                        .zip(&draws)
                        .map(|(l, row)| (l.id.clone(), row[i].bid))
                        .collect(),
                })
                .collect();
            let report = run_samr(&agents, &scenario.licenses, config, &mech_stream)?;
            if !report.terminated {
                return Err(Error::param(
                    "config.samr.max_rounds",
                    format!(
                        "trial {t} did not close within {} rounds",
                        config.max_rounds
                    ),
                ));
            }
            rounds = report.rounds_used;
            for (outcome, row) in report.outcomes.iter().zip(&draws) {
                records.push(price_record(scenario, outcome, row));
            }
        }
        MechanismKind::Share => {
            let share = scenario.config.share.as_ref().expect("validated");
            let revenues = share.revenue_periods();
            let pv_rev = share.pv_revenues();
            for (lic, row) in scenario.licenses.iter().zip(&draws) {
                let bids: Vec<ShareBid> = scenario
                    .bidders
                    .iter()
                    .zip(row)
                    .map(|(p, d)| {
                        ShareBid::new(
                            p.id.clone(),
                            lic.id.clone(),
                            Share::from_f64_clamped(d.bid.to_f64() / pv_rev),
                        )
                    })
                    .collect();
                let escrow = EscrowedValuation::seal(lic.id.clone(), share.valuation);
                let result = run_share_auction(&bids, lic, escrow, &revenues, &mech_stream)?;
                let mut rec = base_record(scenario, &result.outcome, row);
                if let (Some(schedule), Some(w)) =
                    (&result.schedule, winner_index(scenario, &result.outcome))
                {
                    let settlement = Settlement::Share {
                        schedule,
                        rate: share.discount_rate,
                    };
                    let surplus = winner_surplus(&result.outcome, row[w].realized, settlement);
                    rec.payment = Some(schedule.present_value(share.discount_rate));
                    rec.revenue = schedule.total_paid().to_f64();
                    rec.winning_bid = result
                        .outcome
                        .winning_bid
                        .and_then(|b| b.as_share())
                        .map(|s| s.to_f64() * pv_rev);
                    rec.surplus = surplus;
                    rec.cursed = surplus.is_some_and(|s| s < 0.0);
                }
                records.push(rec);
            }
        }
    }
    let revenue = records.iter().map(|r| r.revenue).sum();
    Ok(TrialRecord {
        trial: t,
        revenue,
        rounds,
        licenses: records,
    })
}

fn winner_index(scenario: &Scenario, outcome: &AuctionOutcome) -> Option<usize> {
    let w = outcome.winner.as_ref()?;
    scenario.bidders.iter().position(|b| &b.id == w)
}

fn base_record(scenario: &Scenario, outcome: &AuctionOutcome, row: &[Draw]) -> LicenseRecord {
    let winner = winner_index(scenario, outcome);
    let best = row.iter().map(|d| d.realized).max();
    LicenseRecord {
        license: outcome.license.to_string(),
        winner: outcome.winner.as_ref().map(ToString::to_string),
        payment: None,
        revenue: 0.0,
        winning_bid: None,
        realized_value: winner.map(|w| row[w].realized.to_f64()),
        surplus: None,
        efficient: winner.is_some_and(|w| Some(row[w].realized) == best),
        cursed: false,
        visible_rent: None,
        upfront_fee: 0.0,
    }
}

fn price_record(scenario: &Scenario, outcome: &AuctionOutcome, row: &[Draw]) -> LicenseRecord {
    let mut rec = base_record(scenario, outcome, row);
    if let Some(w) = winner_index(scenario, outcome) {
        let paid = outcome.money_payment().unwrap_or(Money::ZERO);
        let surplus = winner_surplus(outcome, row[w].realized, Settlement::Price);
        rec.payment = Some(paid.to_f64());
        rec.revenue = paid.to_f64();
        rec.upfront_fee = paid.to_f64();
        rec.winning_bid = outcome
            .winning_bid
            .and_then(|b| b.as_money())
            .map(Money::to_f64);
        rec.visible_rent = outcome.visible_rent().map(Money::to_f64);
        rec.surplus = surplus;
        rec.cursed = surplus.is_some_and(|s| s < 0.0);
    }
    rec
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    fn se(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn summarize(mechanism: MechanismKind, records: &[TrialRecord]) -> MetricsSummary {
    let mut revenue = Moments::default();
    let mut surplus = Moments::default();
    let mut rounds = Moments::default();
    let mut upfront = Moments::default();
    let mut rent = Moments::default();
    let (mut instances, mut sold, mut efficient, mut cursed) = (0u64, 0u64, 0u64, 0u64);
    let mut rent_visible = true;
    for trial in records {
        revenue.push(trial.revenue);
        rounds.push(f64::from(trial.rounds));
        for lic in &trial.licenses {
            instances += 1;
            if lic.winner.is_none() {
                continue;
            }
            sold += 1;
            efficient += u64::from(lic.efficient);
            cursed += u64::from(lic.cursed);
            if let Some(s) = lic.surplus {
                surplus.push(s);
            }
            upfront.push(lic.upfront_fee);
            match lic.visible_rent {
                Some(r) => rent.push(r),
                None => rent_visible = false,
            }
        }
    }
    MetricsSummary {
        mechanism,
        trials: records.len() as u64,
        license_instances: instances,
        sold_instances: sold,
        mean_revenue: revenue.mean(),
        revenue_se: revenue.se(),
        efficiency_rate: ratio(efficient, sold),
        winners_curse_rate: ratio(cursed, sold),
        mean_winner_surplus: surplus.mean(),
        winner_surplus_se: surplus.se(),
        mean_rounds: rounds.mean(),
        unsold_rate: ratio(instances - sold, instances),
        mean_upfront_fee: upfront.mean(),
        mean_visible_rent: rent_visible.then(|| rent.mean()),
    }
}
