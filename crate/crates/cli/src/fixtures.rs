//! Historical auction data embedded in the binary.
//!
//! India's 1995 cellular bids are in $m as printed, with no currency-year
//! adjustment. The New Zealand and Australian figures are in local dollars.

use anyhow::{bail, Context, Result};
use auctionlab::mechanisms::{
    run_first_price_sealed, run_samr, run_vickrey_sealed, AuctionOutcome, MechanismKind, SamrAgent,
    SamrConfig, ScoreWeights,
};
use auctionlab::{License, LicenseGroup, Money, PriceBid, RngStream};
use serde::{Deserialize, Serialize};

pub const INDIA_TABLE1_CSV: &str = include_str!("../data/india_table1.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableBid {
    pub bidder: String,
    pub bid: Money,
}

/// One circle of the cellular table. `first` is `None` when the circle drew
/// no bids; `second` is empty when nobody placed second and holds several
/// entries when the second place was shared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub circle: String,
    pub group: LicenseGroup,
    pub first: Option<TableBid>,
    pub second: Vec<TableBid>,
}

impl CircleRecord {
    pub fn bids(&self) -> Vec<PriceBid> {
        self.first
            .iter()
            .chain(&self.second)
            .map(|b| PriceBid::new(b.bidder.as_str(), self.circle.as_str(), b.bid))
            .collect()
    }

    pub fn license(&self) -> License {
        License::new(self.circle.as_str()).with_label(self.circle.as_str(), self.group)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NzFixture {
    pub top_bid: Money,
    pub second_bid: Money,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AustraliaFixture {
    /// The only bidder's value is unknown; it is replayed as exactly the reservation.
    pub reservation: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSet {
    pub india_table1: Vec<CircleRecord>,
    pub nz_1990: NzFixture,
    pub australia_1999: AustraliaFixture,
    pub india_weights: ScoreWeights,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    circle: String,
    group: String,
    place: String,
    bidder: String,
    bid: String,
}

fn parse_group(s: &str) -> Result<LicenseGroup> {
    Ok(match s {
        "A" => LicenseGroup::A,
        "B" => LicenseGroup::B,
        "C" => LicenseGroup::C,
        "none" => LicenseGroup::Ungrouped,
        other => bail!("unknown circle group {other:?}"),
    })
}

fn group_code(g: LicenseGroup) -> &'static str {
    match g {
        LicenseGroup::A => "A",
        LicenseGroup::B => "B",
        LicenseGroup::C => "C",
        LicenseGroup::Ungrouped => "none",
    }
}

pub fn parse_india_table(text: &str) -> Result<Vec<CircleRecord>> {
    let mut out: Vec<CircleRecord> = Vec::new();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.with_context(|| format!("india table row {}", line + 2))?;
        let group = parse_group(&row.group)?;
        if out.last().is_none_or(|c| c.circle != row.circle) {
            out.push(CircleRecord {
                circle: row.circle.clone(),
                group,
                first: None,
                second: Vec::new(),
            });
        }
        let rec = out.last_mut().expect("just pushed");
        let bid = || -> Result<TableBid> {
            Ok(TableBid {
                bidder: row.bidder.clone(),
                bid: row
                    .bid
                    .parse()
                    .with_context(|| format!("{}: bid {:?}", row.circle, row.bid))?,
            })
        };
        match (row.place.as_str(), row.bidder.is_empty()) {
            ("none", true) => {}
            ("1", false) => rec.first = Some(bid()?),
            ("2", false) => rec.second.push(bid()?),
            ("2", true) => {}
            (place, _) => bail!("{}: unexpected place {place:?}", row.circle),
        }
    }
    Ok(out)
}

pub fn write_india_table(records: &[CircleRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row = |c: &CircleRecord, place: &str, b: Option<&TableBid>| Row {
        circle: c.circle.clone(),
        group: group_code(c.group).to_string(),
        place: place.to_string(),
        bidder: b.map(|b| b.bidder.clone()).unwrap_or_default(),
        bid: b.map(|b| b.bid.to_compact_string()).unwrap_or_default(),
    };
    for c in records {
        let Some(first) = &c.first else {
            w.serialize(row(c, "none", None))?;
            continue;
        };
        w.serialize(row(c, "1", Some(first)))?;
        if c.second.is_empty() {
            w.serialize(row(c, "2", None))?;
        }
        for b in &c.second {
            w.serialize(row(c, "2", Some(b)))?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

impl FixtureSet {
    pub fn embedded() -> Result<FixtureSet> {
        Ok(FixtureSet {
            india_table1: parse_india_table(INDIA_TABLE1_CSV)?,
            nz_1990: NzFixture {
                top_bid: Money::from_units(100_000),
                second_bid: Money::from_units(6),
            },
            australia_1999: AustraliaFixture {
                reservation: Money::from_units(20_000),
            },
            india_weights: ScoreWeights::INDIA_BASIC_SERVICE,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureName {
    IndiaTable1,
    Nz1990,
    Australia1999,
    IndiaWeights,
}

impl FixtureName {
    pub const ALL: [FixtureName; 4] = [
        FixtureName::IndiaTable1,
        FixtureName::Nz1990,
        FixtureName::Australia1999,
        FixtureName::IndiaWeights,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureName::IndiaTable1 => "india-table1",
            FixtureName::Nz1990 => "nz-1990",
            FixtureName::Australia1999 => "australia-1999",
            FixtureName::IndiaWeights => "india-weights",
        }
    }

    pub fn parse(s: &str) -> Option<FixtureName> {
        FixtureName::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// One replayed auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayRow {
    /// Circle name for the India table.
    pub auction: String,
    pub group: LicenseGroup,
    pub mechanism: MechanismKind,
    pub bidders: usize,
    pub winner: Option<String>,
    pub winning_bid: Option<Money>,
    pub payment: Option<Money>,
    pub visible_rent: Option<Money>,
    pub rounds: u32,
    pub tie_broken: bool,
}

impl ReplayRow {
    fn new(
        auction: &str,
        group: LicenseGroup,
        mechanism: MechanismKind,
        bidders: usize,
        out: &AuctionOutcome,
    ) -> Self {
        ReplayRow {
            auction: auction.to_string(),
            group,
            mechanism,
            bidders,
            winner: out.winner.as_ref().map(ToString::to_string),
            winning_bid: out.winning_bid.and_then(|b| b.as_money()),
            payment: out.money_payment(),
            visible_rent: out.visible_rent(),
            rounds: out.rounds_used,
            tie_broken: out.tie_broken,
        }
    }
}

/// Increment used when replaying sealed-bid data through the round engine:
/// $0.1m for India, $1 for the others.
fn samr_increment(fixture: FixtureName) -> Money {
    match fixture {
        FixtureName::IndiaTable1 => Money::from_cents(10).expect("positive"),
        _ => Money::from_units(1),
    }
}

fn replay(
    license: &License,
    bids: &[PriceBid],
    mechanism: MechanismKind,
    increment: Money,
    rng: &RngStream,
) -> Result<AuctionOutcome> {
    Ok(match mechanism {
        MechanismKind::Fpsb => run_first_price_sealed(bids, license, rng)?,
        MechanismKind::Vickrey => run_vickrey_sealed(bids, license, rng)?,
        MechanismKind::Samr => {
            let agents: Vec<SamrAgent> = bids
                .iter()
                .map(|b| SamrAgent::new(b.bidder.clone()).value(license.id.clone(), b.amount))
                .collect();
            let report = run_samr(
                &agents,
                std::slice::from_ref(license),
                &SamrConfig::with_increment(increment),
                rng,
            )?;
            report.outcomes.into_iter().next().expect("one license")
        }
        other => bail!("fixtures replay as fpsb, vickrey or samr, not {other}"),
    })
}

/// Runs the fixture's bids through `mechanism`, one row per auction.
pub fn replay_fixture(
    set: &FixtureSet,
    fixture: FixtureName,
    mechanism: MechanismKind,
    seed: u64,
) -> Result<Vec<ReplayRow>> {
    let rng = RngStream::new(seed).child("fixture").child(fixture.name());
    let inc = samr_increment(fixture);
    match fixture {
        FixtureName::IndiaTable1 => set
            .india_table1
            .iter()
            .map(|c| {
                let bids = c.bids();
                let out = replay(&c.license(), &bids, mechanism, inc, &rng)?;
                Ok(ReplayRow::new(
                    &c.circle,
                    c.group,
                    mechanism,
                    bids.len(),
                    &out,
                ))
            })
            .collect(),
        FixtureName::Nz1990 => {
            let license = License::new("nz-1990");
            let bids = [
                PriceBid::new("top bidder", "nz-1990", set.nz_1990.top_bid),
                PriceBid::new("second bidder", "nz-1990", set.nz_1990.second_bid),
            ];
            let out = replay(&license, &bids, mechanism, inc, &rng)?;
            Ok(vec![ReplayRow::new(
                "nz-1990",
                LicenseGroup::Ungrouped,
                mechanism,
                2,
                &out,
            )])
        }
        FixtureName::Australia1999 => {
            let reservation = set.australia_1999.reservation;
            let license = License::new("australia-1999").with_reservation(reservation);
            let bids = [PriceBid::new("sole bidder", "australia-1999", reservation)];
            let out = replay(&license, &bids, mechanism, inc, &rng)?;
            Ok(vec![ReplayRow::new(
                "australia-1999",
                LicenseGroup::Ungrouped,
                mechanism,
                1,
                &out,
            )])
        }
        FixtureName::IndiaWeights => bail!("india-weights holds scoring weights, not bids"),
    }
}
