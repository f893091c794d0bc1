//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every tolerance used is pinned below.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use auctionlab::agents::{
    certainty_equivalent_bid, share_backout, CashFlowForecast, ValueDistribution,
};
use auctionlab::mechanisms::{compute_payment_schedule, run_vickrey_sealed, MechanismKind};
use auctionlab::montecarlo::{run_trials, RunOptions, Scenario};
use auctionlab::properties::{
    anonymity_battery, check_no_overbid_incentive_share, check_weak_dominance,
    revenue_equivalence_test, share_auction_battery, DominanceGrid, ShareOverbidGrid, Verdict,
};
use auctionlab::{BidderId, License, Money, PriceBid, RngStream, Share};
use auctionlab_cli::commands::fixture_output;
use auctionlab_cli::fixtures::{replay_fixture, FixtureName, FixtureSet, INDIA_TABLE1_CSV};
use rand::SeedableRng;
use rand_distr::Distribution;

const SEED: u64 = 42;

const DOMINANCE_BUDGET: Duration = Duration::from_secs(10);
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(60);
const SHARE_BUDGET: Duration = Duration::from_secs(10);

const EQUIVALENCE_TRIALS: usize = 100_000;
const EQUIVALENCE_SIGMAS: f64 = 3.0;

const CURSE_TRIALS: u64 = 100_000;
const CURSE_SIGMAS: f64 = 5.0;

const CE_EXPECTED: f64 = 9.00;
const CE_TOLERANCE: f64 = 0.02;
const CE_ORACLE_DRAWS: usize = 1_000_000;

const SHARE_PROFILES: usize = 1_000;
const ANONYMITY_PROFILES: usize = 100;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn units(u: u32) -> Money {
    Money::from_units(u)
}

fn vickrey_worked_example() -> Check {
    let bids = [
        PriceBid::new("A", "L", units(10)),
        PriceBid::new("B", "L", units(15)),
        PriceBid::new("C", "L", units(20)),
    ];
    let out = run_vickrey_sealed(&bids, &License::new("L"), &RngStream::new(SEED))
        .map_err(|e| e.to_string())?;
    ensure(
        out.winner == Some(BidderId::from("C")),
        format!("winner {:?}", out.winner),
    )?;
    ensure(
        out.money_payment() == Some(units(15)),
        format!("payment {:?}", out.money_payment()),
    )?;
    Ok("C wins and pays 15.00".into())
}

fn nz_fixture() -> Check {
    let set = FixtureSet::embedded().map_err(|e| e.to_string())?;
    let rows = replay_fixture(&set, FixtureName::Nz1990, MechanismKind::Vickrey, SEED)
        .map_err(|e| e.to_string())?;
    let row = &rows[0];
    ensure(
        row.payment == Some(units(6)),
        format!("payment {:?}", row.payment),
    )?;
    ensure(
        row.visible_rent == Some(units(99_994)),
        format!("rent {:?}", row.visible_rent),
    )?;
    Ok("payment 6.00, visible rent 99994.00".into())
}

fn india_table() -> Check {
    let emitted = fixture_output("india-table1", None, SEED, None).map_err(|e| e.to_string())?;
    ensure(
        emitted == INDIA_TABLE1_CSV,
        "emitted table differs from the embedded file",
    )?;
    let set = FixtureSet::embedded().map_err(|e| e.to_string())?;
    ensure(
        set.india_table1.len() == 20,
        format!("{} circles", set.india_table1.len()),
    )?;
    let mut mp = Vec::new();
    for m in [
        MechanismKind::Fpsb,
        MechanismKind::Vickrey,
        MechanismKind::Samr,
    ] {
        let rows = replay_fixture(&set, FixtureName::IndiaTable1, m, SEED)
            .map_err(|e| format!("{m}: {e}"))?;
        ensure(rows.len() == 20, format!("{m}: {} rows", rows.len()))?;
        for name in ["Arunachal Pradesh", "Jammu Kashmir"] {
            let r = rows.iter().find(|r| r.auction == name).ok_or(name)?;
            ensure(r.winner.is_none(), format!("{m}: {name} should be unsold"))?;
        }
        for name in ["West Bengal", "Assam"] {
            let r = rows.iter().find(|r| r.auction == name).ok_or(name)?;
            ensure(
                r.winner.as_deref() == Some("Reliance"),
                format!("{m}: {name} winner {:?}", r.winner),
            )?;
            if m == MechanismKind::Vickrey {
                ensure(
                    r.payment == Some(Money::ZERO),
                    format!("{name}: sole bid pays {:?}", r.payment),
                )?;
            }
        }
        mp.push(
            rows.into_iter()
                .find(|r| r.auction == "Madhya Pradesh")
                .ok_or("Madhya Pradesh")?,
        );
    }
    ensure(
        mp[0].payment == Some(units(19)),
        format!("first-price {:?}", mp[0].payment),
    )?;
    ensure(
        mp[1].payment == Some(units(2)),
        format!("second-price {:?}", mp[1].payment),
    )?;
    Ok("20 circles byte-exact; Madhya Pradesh first-price 19, second-price 2".into())
}

fn australia_fixture() -> Check {
    let set = FixtureSet::embedded().map_err(|e| e.to_string())?;
    let rows = replay_fixture(&set, FixtureName::Australia1999, MechanismKind::Samr, SEED)
        .map_err(|e| e.to_string())?;
    ensure(
        rows[0].payment == Some(units(20_000)),
        format!("payment {:?}", rows[0].payment),
    )?;
    Ok("sole bidder pays 20000.00".into())
}

fn dominance() -> Check {
    let start = Instant::now();
    let grid = DominanceGrid::default();
    let vickrey = check_weak_dominance(MechanismKind::Vickrey, &grid).map_err(|e| e.to_string())?;
    let fpsb = check_weak_dominance(MechanismKind::Fpsb, &grid).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(
        vickrey.verdict == Verdict::WeaklyDominant,
        format!("vickrey: {:?}", vickrey.counterexample),
    )?;
    let cx = fpsb
        .counterexample
        .as_ref()
        .ok_or("fpsb has no counterexample")?;
    ensure(fpsb.verdict == Verdict::NotDominant, "fpsb verdict")?;
    ensure(
        cx.replay(MechanismKind::Fpsb).map_err(|e| e.to_string())?,
        "counterexample does not replay",
    )?;
    ensure(elapsed <= DOMINANCE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "vickrey weakly dominant over {} profiles; fpsb value {} gains {} by bidding {}; {elapsed:.2?}",
        vickrey.profiles_checked, cx.value, cx.gain, cx.deviation
    ))
}

fn revenue_equivalence() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for n in [2, 3, 5] {
        let r = revenue_equivalence_test(n, EQUIVALENCE_TRIALS, SEED).map_err(|e| e.to_string())?;
        let theory = (n - 1) as f64 / (n + 1) as f64;
        let gap = (r.mean_fpsb - r.mean_vickrey).abs();
        ensure(
            gap <= EQUIVALENCE_SIGMAS * r.pooled_se,
            format!("n={n}: gap {gap} > 3 x {}", r.pooled_se),
        )?;
        ensure(
            (r.mean_fpsb - theory).abs() <= EQUIVALENCE_SIGMAS * r.se_fpsb,
            format!("n={n}: fpsb {} vs {theory}", r.mean_fpsb),
        )?;
        ensure(
            (r.mean_vickrey - theory).abs() <= EQUIVALENCE_SIGMAS * r.se_vickrey,
            format!("n={n}: vickrey {} vs {theory}", r.mean_vickrey),
        )?;
        parts.push(format!("n={n} {:.4}/{:.4}", r.mean_fpsb, r.mean_vickrey));
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= EQUIVALENCE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!("{}; {elapsed:.2?}", parts.join(", ")))
}

fn winners_curse() -> Check {
    let text = include_str!("../scenarios/common_value.toml");
    let mut scenario = Scenario::from_toml_str(text).map_err(|e| e.to_string())?;
    scenario.trials = CURSE_TRIALS;
    let r = run_trials(&scenario, SEED, RunOptions::default()).map_err(|e| e.to_string())?;
    let s = r.summary;
    ensure(
        s.mean_winner_surplus < 0.0,
        format!("mean surplus {}", s.mean_winner_surplus),
    )?;
    ensure(
        s.mean_winner_surplus.abs() > CURSE_SIGMAS * s.winner_surplus_se,
        format!("|{}| <= 5 x {}", s.mean_winner_surplus, s.winner_surplus_se),
    )?;
    Ok(format!(
        "mean winner surplus {:.4} (SE {:.4})",
        s.mean_winner_surplus, s.winner_surplus_se
    ))
}

fn risk_aversion() -> Check {
    let (mean, sd, a) = (10.0f64, 2.0f64, 0.5f64);
    let dist = ValueDistribution::Normal { mean, sd };
    let normal = rand_distr::Normal::new(mean, sd).map_err(|e| e.to_string())?;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(SEED);
    let mgf = (0..CE_ORACLE_DRAWS)
        .map(|_| (-a * normal.sample(&mut rng)).exp())
        .sum::<f64>()
        / CE_ORACLE_DRAWS as f64;
    let oracle = -mgf.ln() / a;
    let bid = certainty_equivalent_bid(&dist, a)
        .map_err(|e| e.to_string())?
        .to_f64();
    ensure(
        (bid - CE_EXPECTED).abs() <= CE_TOLERANCE,
        format!("bid {bid}"),
    )?;
    ensure(
        (bid - oracle).abs() <= CE_TOLERANCE,
        format!("bid {bid} vs oracle {oracle}"),
    )?;
    for i in 1..=20 {
        let a = i as f64 / 10.0;
        let b = certainty_equivalent_bid(&dist, a)
            .map_err(|e| e.to_string())?
            .to_f64();
        ensure(b < mean, format!("a={a}: bid {b} not below mean"))?;
    }
    Ok(format!(
        "bid {bid:.2}, Monte Carlo oracle {oracle:.4}; below 10 for a in 0.1..=2.0"
    ))
}

fn share_suite() -> Check {
    let start = Instant::now();
    let battery = share_auction_battery(SHARE_PROFILES, SEED).map_err(|e| e.to_string())?;
    ensure(battery.pass(), format!("{:?}", battery.failures.first()))?;

    // 0.3 of 100 a period against a valuation of 100: 30, 30, 30, then 10.
    let s = compute_payment_schedule(
        Share::from_micros(300_000).unwrap(),
        &[units(100); 30],
        units(100),
    );
    let payments: Vec<Money> = s.entries.iter().map(|e| e.payment).collect();
    ensure(
        payments == [units(30), units(30), units(30), units(10)],
        format!("{payments:?}"),
    )?;
    ensure(
        s.complete && s.total_paid() == units(100),
        "schedule incomplete",
    )?;

    let overbid = check_no_overbid_incentive_share(&ShareOverbidGrid::default())
        .map_err(|e| e.to_string())?;
    ensure(
        overbid.verdict == Verdict::WeaklyDominant,
        format!("{:?}", overbid.counterexample),
    )?;
    let elapsed = start.elapsed();
    ensure(elapsed <= SHARE_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} profiles allocate and schedule exactly; no-overbid holds over {} profiles; {elapsed:.2?}",
        battery.profiles, overbid.profiles_checked
    ))
}

fn backout() -> Check {
    let f = CashFlowForecast::flat(30, units(100), units(60), 0.10);
    let share = share_backout(&f).map_err(|e| e.to_string())?;
    let annuity = |x: f64| x * (1.0 - 1.1f64.powi(-30)) / 0.10;
    let oracle = Share::from_f64((annuity(100.0) - annuity(60.0)) / annuity(100.0))
        .map_err(|e| e.to_string())?;
    ensure(share.to_string() == "0.400000", format!("share {share}"))?;
    // Exact at 6 dp.
    ensure(share == oracle, format!("oracle {oracle}"))?;
    Ok(format!("{share}, oracle {oracle}"))
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_auctionlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), format!("{args:?} exited {status}"))?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/samr_regional.toml");
    let share = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/scenarios/low_competition_share.toml"
    );
    let runs: [(&str, Vec<&str>); 4] = [
        (
            "run",
            vec!["run", scenario, "--seed", "7", "--trials", "400"],
        ),
        (
            "run csv",
            vec![
                "run", share, "--seed", "7", "--trials", "2000", "--format", "csv",
            ],
        ),
        (
            "compare",
            vec![
                "compare",
                share,
                "--mechanisms",
                "vickrey,share,fpsb",
                "--trials",
                "2000",
            ],
        ),
        ("verify", vec!["verify", "--seed", "7", "--trials", "20000"]),
    ];
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for threads in [None, Some("1"), Some("4")] {
            let mut args = args.clone();
            if let (Some(t), true) = (threads, name != &"verify") {
                args.extend(["--threads", t]);
            }
            let path = dir.path().join(format!(
                "{}-{}",
                name.replace(' ', "-"),
                threads.unwrap_or("default")
            ));
            outputs.push(run_cli(&args, &path)?);
        }
        ensure(
            outputs.windows(2).all(|w| w[0] == w[1]),
            format!("{name}: outputs differ across repeats"),
        )?;
    }
    Ok("run, compare and verify byte-identical across repeats and thread counts".into())
}

fn anonymity() -> Check {
    let mut total = 0;
    for m in MechanismKind::ALL {
        let r = anonymity_battery(m, ANONYMITY_PROFILES, SEED).map_err(|e| e.to_string())?;
        ensure(r.pass(), format!("{m}: {:?}", r.failures.first()))?;
        total += r.passed;
    }
    Ok(format!(
        "{total} permuted profiles equivariant across all five mechanisms"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("vickrey worked example", vickrey_worked_example),
        ("nz 1990 fixture", nz_fixture),
        ("india table replay", india_table),
        ("australia reservation", australia_fixture),
        ("dominance suite", dominance),
        ("revenue equivalence", revenue_equivalence),
        ("winner's curse", winners_curse),
        ("risk aversion", risk_aversion),
        ("share auction suite", share_suite),
        ("share back-out", backout),
        ("determinism", determinism),
        ("anonymity battery", anonymity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
