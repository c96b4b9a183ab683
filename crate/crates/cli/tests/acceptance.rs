//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p equity-activity-cli --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use equity_activity::dfa::{
    self, fluctuation_function_at, hurst, hurst_vs_size, DfaConfig, DfaPoint, HurstCrossSection,
    HurstEntry,
};
use equity_activity::distribution::{normalize_logs, pdf_histogram_in, BinningScheme};
use equity_activity::growth::{fit_beta, growth_rate, growth_rates, BinnedStat, StatBin};
use equity_activity::ingest::{
    aggregate, cross_measure_from_averages, group_by_instrument, read_trade_file, Calendar,
    InstrumentAverages, SamplingInterval, TradeFormat, TradeRecord,
};
use equity_activity::surrogate::{
    lognormal_activity, member_seed, relation_experiment, RelationConfig, SurrogateSpec,
    DEFAULT_SCHEDULE,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, budget: Duration, detail: String, ok: bool) -> Outcome {
    let took = start.elapsed();
    let detail = format!(
        "{detail}; {:.1} s (budget {} s)",
        took.as_secs_f64(),
        budget.as_secs()
    );
    check(ok && took < budget, detail)
}

fn dfa_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut points = 0;
    for case in 0..50u64 {
        let n = rng.random_range(16..=256);
        let series = if case % 2 == 0 {
            support::gaussian(n, 100 + case)
        } else {
            support::ar1(n, 0.8, 100 + case)
        };
        for order in [1, 2] {
            let windows: Vec<usize> = (order + 2..=n).collect();
            let got =
                fluctuation_function_at(&series, &windows, order).map_err(|e| e.to_string())?;
            for p in got {
                let want = support::naive_fluctuation(&series, p.window, order);
                worst = worst.max((p.fluctuation - want).abs());
                points += 1;
            }
        }
    }
    within_budget(
        start,
        Duration::from_secs(10),
        format!("max |F - F_naive| = {worst:.2e} over {points} (series, order, window) triples"),
        worst <= 1e-10,
    )
}

fn white_noise() -> Outcome {
    let start = Instant::now();
    let cfg = DfaConfig::default();
    let hs: Vec<f64> = (0..100u64)
        .map(|seed| dfa::analyze(&support::gaussian(1 << 16, 5000 + seed), &cfg).map(|r| r.h()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let inside = hs.iter().filter(|h| (0.48..=0.52).contains(*h)).count();
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    within_budget(
        start,
        Duration::from_secs(60),
        format!("{inside}/100 seeds with H in [0.48, 0.52], mean H = {mean:.4}"),
        inside >= 95,
    )
}

fn hurst_recovery() -> Outcome {
    let start = Instant::now();
    let cfg = DfaConfig::default();
    let template = SurrogateSpec {
        length: 1 << 16,
        seed: 303,
        ..SurrogateSpec::default()
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for (row, target) in [0.6, 0.75, 0.9].into_iter().enumerate() {
        let mut sum = 0.0;
        for m in 0..32u64 {
            let spec = SurrogateSpec {
                target_h: target,
                seed: member_seed(template.seed, row as u64 * 32 + m),
                ..template
            };
            let v = lognormal_activity(&spec).map_err(|e| e.to_string())?;
            sum += dfa::analyze(&v, &cfg).map_err(|e| e.to_string())?.h();
        }
        let mean = sum / 32.0;
        ok &= (mean - target).abs() <= 0.03;
        lines.push(format!("H {target}: {mean:.4}"));
    }
    within_budget(start, Duration::from_secs(300), lines.join(", "), ok)
}

fn relation() -> Outcome {
    let start = Instant::now();
    let template = SurrogateSpec {
        length: 1 << 16,
        ..SurrogateSpec::default()
    };
    let report = relation_experiment(&DEFAULT_SCHEDULE, 32, &template, &RelationConfig::default())
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut lines = Vec::new();
    for r in &report.rows {
        if let Some(e) = &r.error {
            return Err(format!("row H = {} failed: {e}", r.target_h));
        }
        let gap = r.relation_gap();
        if r.target_h == 0.86 {
            ok &= (r.beta - 0.14).abs() <= 0.05;
            lines.push(format!("H 0.86: beta = {:.4} (want 0.14 +- 0.05)", r.beta));
        } else {
            ok &= gap.abs() <= 0.07;
            lines.push(format!("H {}: beta + H - 1 = {gap:+.4}", r.target_h));
        }
    }
    within_budget(start, Duration::from_secs(900), lines.join(", "), ok)
}

fn growth_exactness() -> Outcome {
    let examples = [
        (growth_rate(100.0, 100.0), std::f64::consts::LN_2),
        (growth_rate(100.0, 0.0), 0.0),
        (growth_rate(1.0, 3.0), 4f64.ln()),
    ];
    let worst = examples
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > 1e-12 {
        return Err(format!("worked examples off by {worst:.2e}"));
    }

    // Exact whenever c * V is itself exact: binary scale factors on any
    // values, and integer factors on integer values (cents, shares).
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    let binary = (prop::collection::vec(1e-3f64..1e12, 2..64), -60i32..60);
    runner
        .run(&binary, |(v, k)| {
            let c = 2f64.powi(k);
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let (a, b) = (growth_rates(&v), growth_rates(&scaled));
            for (x, y) in a.observations.iter().zip(&b.observations) {
                prop_assert_eq!(x.g.to_bits(), y.g.to_bits());
            }
            Ok(())
        })
        .map_err(|e| format!("binary rescaling: {e}"))?;
    let integer = (prop::collection::vec(0u64..1 << 26, 2..64), 1u64..1 << 26);
    runner
        .run(&integer, |(v, c)| {
            let v: Vec<f64> = v.into_iter().map(|x| x as f64).collect();
            let scaled: Vec<f64> = v.iter().map(|x| c as f64 * x).collect();
            let (a, b) = (growth_rates(&v), growth_rates(&scaled));
            prop_assert_eq!(a.observations.len(), b.observations.len());
            for (x, y) in a.observations.iter().zip(&b.observations) {
                prop_assert_eq!(x.g.to_bits(), y.g.to_bits());
            }
            Ok(())
        })
        .map_err(|e| format!("integer rescaling: {e}"))?;
    // any other c: c * V rounds, so only a few ulp survive
    let general = (prop::collection::vec(1e-3f64..1e12, 2..64), 1e-6f64..1e6);
    runner
        .run(&general, |(v, c)| {
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let (a, b) = (growth_rates(&v), growth_rates(&scaled));
            for (x, y) in a.observations.iter().zip(&b.observations) {
                let ulps = (x.g.to_bits() as i64 - y.g.to_bits() as i64).abs();
                prop_assert!(ulps <= 4, "{} vs {} ({ulps} ulp)", x.g, y.g);
            }
            Ok(())
        })
        .map_err(|e| format!("general rescaling: {e}"))?;
    Ok(format!(
        "examples within {worst:.1e}; bitwise-equal g for binary and integer c, \
         within 4 ulp for general c (3 x 2000 cases)"
    ))
}

fn collapse() -> Outcome {
    let n = 100_000;
    let sample = |log_mu: f64, log_sigma: f64, seed: u64| {
        let spec = SurrogateSpec {
            length: 1 << 17,
            target_h: 0.5,
            log_mu,
            log_sigma,
            seed,
        };
        lognormal_activity(&spec).map(|mut v| {
            v.truncate(n);
            v
        })
    };
    let a = sample(3.0, 0.4, 61).and_then(|v| normalize_logs(&v));
    let b = sample(11.0, 1.6, 62).and_then(|v| normalize_logs(&v));
    let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
    let range = (-4.0, 4.0);
    let pa = pdf_histogram_in(&a, 40, BinningScheme::Linear, range).map_err(|e| e.to_string())?;
    let pb = pdf_histogram_in(&b, 40, BinningScheme::Linear, range).map_err(|e| e.to_string())?;
    let worst = pa
        .densities
        .iter()
        .zip(&pb.densities)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 0.05,
        format!("max |pdf_a(z) - pdf_b(z)| = {worst:.4} at n = {n}"),
    )
}

fn fit_exactness() -> Outcome {
    let bins: Vec<StatBin> = (0..48)
        .map(|k| {
            let lo = 10f64.powf(k as f64 / 8.0);
            let hi = 10f64.powf((k + 1) as f64 / 8.0);
            let center = (lo * hi).sqrt();
            StatBin {
                lo,
                hi,
                center,
                count: 50,
                mean: std::f64::consts::LN_2,
                std: 0.9 * center.powf(-0.14),
                sufficient: true,
            }
        })
        .collect();
    let stat = BinnedStat {
        bins_per_decade: 8,
        min_occupancy: 10,
        total: 50 * bins.len(),
        bins,
    };
    let beta = fit_beta(&stat, None).map_err(|e| e.to_string())?.exponent;

    let points: Vec<DfaPoint> = (0..30)
        .map(|k| {
            let w = (6.0 * 10f64.powf(k as f64 / 8.0)).round() as usize;
            DfaPoint {
                window: w,
                fluctuation: 1.7 * (w as f64).powf(0.75),
            }
        })
        .collect();
    let h = hurst(&points, (1, usize::MAX))
        .map_err(|e| e.to_string())?
        .h;

    let entries: Vec<HurstEntry> = (0..60)
        .map(|k| {
            let v = 10f64.powf(3.0 + k as f64 / 10.0);
            HurstEntry {
                instrument: format!("S{k}"),
                h: 0.2 + 0.033 * v.ln(),
                stderr: 0.01,
                mean_daily_value: v,
            }
        })
        .collect();
    let cs = HurstCrossSection {
        entries,
        failures: Vec::new(),
        mean_h: 0.0,
        std_h: 0.0,
        ks: None,
        low_n: false,
    };
    let slope = hurst_vs_size(&cs, 2).map_err(|e| e.to_string())?.slope;
    let errs = [(beta - 0.14).abs(), (h - 0.75).abs(), (slope - 0.033).abs()];
    check(
        errs.iter().all(|e| *e <= 1e-9),
        format!(
            "beta err {:.1e}, H err {:.1e}, size slope err {:.1e}",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/micro")
}

fn aggregation() -> Outcome {
    let dir = fixture();
    let calendar = Calendar::read(&dir.join("calendar.txt")).map_err(|e| e.to_string())?;
    let mut records: Vec<TradeRecord> = Vec::new();
    for f in ["trades_a.csv", "trades_b.csv.gz"] {
        let parsed =
            read_trade_file(&dir.join(f), &TradeFormat::default()).map_err(|e| e.to_string())?;
        records.extend(parsed.records);
    }
    let mut bins_checked = 0;
    for (sym, trades) in group_by_instrument(records) {
        let five = aggregate(&sym, &trades, SamplingInterval::FIVE_MINUTES, &calendar)
            .map_err(|e| e.to_string())?;
        let thirty = aggregate(&sym, &trades, SamplingInterval::THIRTY_MINUTES, &calendar)
            .map_err(|e| e.to_string())?;
        let mut per_day: BTreeMap<_, usize> = BTreeMap::new();
        for t in five.starts() {
            *per_day.entry(t.date()).or_default() += 1;
        }
        if per_day.len() != calendar.len() || per_day.values().any(|&c| c != 78) {
            return Err(format!("{sym}: a 5-min day does not have 78 bins"));
        }
        for (k, c) in thirty.bins().iter().enumerate() {
            let part = &five.bins()[6 * k..6 * k + 6];
            let n: u64 = part.iter().map(|b| b.trades).sum();
            let q: u64 = part.iter().map(|b| b.volume).sum();
            let v: f64 = part.iter().map(|b| b.value).sum();
            if n != c.trades || q != c.volume {
                return Err(format!("{sym}: N or Q mismatch in 30-min bin {k}"));
            }
            // one ulp per addend
            if (v - c.value).abs() > 6.0 * f64::EPSILON * c.value.abs() {
                return Err(format!("{sym}: V {} vs {} in 30-min bin {k}", c.value, v));
            }
            bins_checked += 1;
        }
    }
    Ok(format!(
        "{bins_checked} 30-min bins equal their 5-min sums; 78 bins on each of {} days",
        calendar.len()
    ))
}

fn cross_measure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let size = Normal::new(13.0, 2.0).unwrap();
    let averages: Vec<InstrumentAverages> = (0..500)
        .map(|i| {
            let ln_v: f64 = size.sample(&mut rng);
            InstrumentAverages {
                instrument: format!("I{i:03}"),
                mean_value: ln_v.exp(),
                mean_trades: (0.76 * ln_v - 6.0 + noise.sample(&mut rng)).exp(),
                mean_volume: (0.80 * ln_v - 3.0 + noise.sample(&mut rng)).exp(),
            }
        })
        .collect();
    let r = cross_measure_from_averages(averages).map_err(|e| e.to_string())?;
    let (a, b) = (r.exponent_nv.slope, r.exponent_qv.slope);
    check(
        (a - 0.76).abs() <= 0.05
            && (b - 0.80).abs() <= 0.05
            && r.pearson_log_nv >= 0.8
            && r.pearson_log_qv >= 0.8,
        format!(
            "N ~ V^{a:.4}, Q ~ V^{b:.4}, r = {:.3} / {:.3}",
            r.pearson_log_nv, r.pearson_log_qv
        ),
    )
}

fn digests(root: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    let text = std::fs::read_to_string(root.join("manifest.json")).map_err(|e| e.to_string())?;
    let run: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    for stage in run["stages"].as_array().ok_or("no stages")? {
        let rel = stage["manifest"]["path"]
            .as_str()
            .ok_or("bad manifest path")?;
        let text = std::fs::read_to_string(root.join(rel)).map_err(|e| e.to_string())?;
        let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        for a in m["artifacts"].as_array().ok_or("no artifacts")? {
            out.insert(
                a["path"].as_str().unwrap_or_default().to_string(),
                a["sha256"].as_str().unwrap_or_default().to_string(),
            );
        }
    }
    Ok(out)
}

fn reproducibility() -> Outcome {
    let config = fixture().join("eqa.toml");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_eqa"))
            .args(["all", "--seed", "11", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("RUST_LOG", "error")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("`all` exited with {status}"));
        }
        runs.push(digests(&out)?);
    }
    check(
        !runs[0].is_empty() && runs[0] == runs[1],
        format!(
            "{} artifact digests identical across two runs",
            runs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("DFA oracle equivalence", dfa_oracle),
        ("white-noise calibration", white_noise),
        ("Hurst recovery", hurst_recovery),
        ("beta = 1 - H relation experiment", relation),
        ("growth-rate exactness", growth_exactness),
        ("log-normal collapse", collapse),
        ("fit exactness", fit_exactness),
        ("aggregation consistency", aggregation),
        ("cross-measure recovery", cross_measure),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
