//! Writes the micro-fixture used by the CLI tests:
//!
//!     cargo run -p equity-activity-cli --example make_fixture -- crates/cli/tests/fixtures/micro
//!
//! Three instruments about a decade apart in size over 40 sessions. `SML`
//! skips three sessions and its first session holds five hand-placed trades.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

const SESSIONS: usize = 40;

struct Profile {
    symbol: &'static str,
    trades_per_day: f64,
    price: f64,
    median_shares: f64,
    missing: &'static [usize],
}

const PROFILES: [Profile; 3] = [
    Profile {
        symbol: "BIG",
        trades_per_day: 400.0,
        price: 48.0,
        median_shares: 600.0,
        missing: &[],
    },
    Profile {
        symbol: "MID",
        trades_per_day: 120.0,
        price: 21.0,
        median_shares: 250.0,
        missing: &[],
    },
    Profile {
        symbol: "SML",
        trades_per_day: 30.0,
        price: 4.5,
        median_shares: 120.0,
        missing: &[7, 19, 33],
    },
];

/// Five trades on the first session of `SML`.
const HAND_PLACED: [(&str, &str, u64); 5] = [
    ("09:30:00", "4.50", 100),
    ("09:33:20", "4.55", 200),
    ("09:35:00", "4.40", 300),
    ("10:59:59", "4.60", 50),
    ("16:00:00", "4.75", 1000),
];

fn sessions() -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2001, 1, 2).unwrap();
    let mut out = Vec::new();
    while out.len() < SESSIONS {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Second of the session drawn from a U-shaped intensity.
fn trade_second(rng: &mut impl Rng) -> i64 {
    loop {
        let s = rng.random_range(0..=390 * 60);
        let x = s as f64 / (390.0 * 60.0) - 0.5;
        if rng.random::<f64>() * 3.0 < 1.0 + 8.0 * x * x {
            return s;
        }
    }
}

fn generate(p: &Profile, days: &[NaiveDate], rng: &mut ChaCha8Rng) -> Vec<(NaiveDateTime, String)> {
    let mut rows = Vec::new();
    let shares = LogNormal::new(p.median_shares.ln(), 0.8).unwrap();
    let shock = Normal::new(0.0, 0.35).unwrap();
    let tick = Normal::new(0.0, 0.002).unwrap();
    let mut level = 0.0;
    let mut price = p.price;
    for (k, day) in days.iter().enumerate() {
        level = 0.7 * level + shock.sample(rng);
        if p.missing.contains(&k) {
            continue;
        }
        let open = day.and_hms_opt(9, 30, 0).unwrap();
        if p.symbol == "SML" && k == 0 {
            for (t, px, q) in HAND_PLACED {
                let ts = NaiveDateTime::parse_from_str(&format!("{day} {t}"), "%Y-%m-%d %H:%M:%S")
                    .unwrap();
                rows.push((ts, format!("{},{px},{q}", p.symbol)));
            }
            continue;
        }
        let n = (p.trades_per_day * f64::exp(level)).round().max(1.0) as usize;
        let mut day_rows: Vec<(NaiveDateTime, String)> = (0..n)
            .map(|_| {
                let ts = open + Duration::seconds(trade_second(rng));
                price *= f64::exp(tick.sample(rng));
                let q = (shares.sample(rng) / 10.0).round().max(1.0) as u64 * 10;
                (ts, format!("{},{:.2},{q}", p.symbol, price))
            })
            .collect();
        day_rows.sort_by_key(|r| r.0);
        rows.extend(day_rows);
    }
    rows
}

fn render(rows: &[(NaiveDateTime, String)]) -> String {
    let mut text = String::from("timestamp,symbol,price,shares\n");
    for (ts, rest) in rows {
        writeln!(text, "{},{rest}", ts.format("%Y-%m-%dT%H:%M:%S")).unwrap();
    }
    text
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir)?;
    let days = sessions();
    let mut rng = ChaCha8Rng::seed_from_u64(2001);

    let mut calendar = String::from("# sessions of the micro-fixture\n");
    for d in &days {
        writeln!(calendar, "{d}").unwrap();
    }
    std::fs::write(dir.join("calendar.txt"), calendar)?;

    let big = generate(&PROFILES[0], &days, &mut rng);
    let mid = generate(&PROFILES[1], &days, &mut rng);
    let sml = generate(&PROFILES[2], &days, &mut rng);

    let mut a: Vec<_> = big.into_iter().chain(mid).collect();
    a.sort_by_key(|x| x.0);
    std::fs::write(dir.join("trades_a.csv"), render(&a))?;

    let mut gz = GzEncoder::new(Vec::new(), Compression::best());
    gz.write_all(render(&sml).as_bytes())?;
    std::fs::write(dir.join("trades_b.csv.gz"), gz.finish()?)?;
    Ok(())
}
