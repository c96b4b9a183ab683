//! File formats for pipeline artifacts.
//!
//! Numbers are written with the shortest decimal representation that
//! round-trips (`{}` on `f64`), so the same results always give the same
//! bytes.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dfa::{DfaPoint, HurstCrossSection, HurstVsSize};
use crate::distribution::PdfEstimate;
use crate::error::{Error, Result};
use crate::growth::BinnedStat;
use crate::ingest::{ActivityBin, ActivitySeries, SamplingInterval};
use crate::pattern::{IntradayPattern, MarketPattern};
use crate::surrogate::RelationExperimentReport;

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(f)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::format(path, format!("{other:?}")),
    }
}

/// Writes a header and rows of preformatted fields.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// Columns `timestamp,V,N,Q`.
pub fn write_series_csv(path: &Path, series: &ActivitySeries) -> Result<()> {
    let rows = series.starts().iter().zip(series.bins()).map(|(t, b)| {
        [
            t.format(TIMESTAMP_FORMAT).to_string(),
            num(b.value),
            b.trades.to_string(),
            b.volume.to_string(),
        ]
    });
    write_table(path, &["timestamp", "V", "N", "Q"], rows)
}

#[derive(Debug, Deserialize)]
struct SeriesRow {
    timestamp: String,
    #[serde(rename = "V")]
    value: f64,
    #[serde(rename = "N")]
    trades: u64,
    #[serde(rename = "Q")]
    volume: u64,
}

pub fn read_series_csv(path: &Path, entry: &SeriesEntry) -> Result<ActivitySeries> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut starts = Vec::new();
    let mut bins = Vec::new();
    for (i, row) in r.deserialize::<SeriesRow>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let t = NaiveDateTime::parse_from_str(&row.timestamp, TIMESTAMP_FORMAT).map_err(|e| {
            Error::format(
                path,
                format!("row {}: bad timestamp {:?}: {e}", i + 2, row.timestamp),
            )
        })?;
        starts.push(t);
        bins.push(ActivityBin {
            value: row.value,
            trades: row.trades,
            volume: row.volume,
        });
    }
    if bins.len() != entry.bins {
        return Err(Error::format(
            path,
            format!("{} bins on disk, manifest says {}", bins.len(), entry.bins),
        ));
    }
    ActivitySeries::from_parts(
        entry.instrument.clone(),
        entry.interval,
        starts,
        bins,
        entry.trading_days,
    )
    .map_err(|e| Error::format(path, e.to_string()))
}

/// One persisted series; `file` is relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub instrument: String,
    pub interval: SamplingInterval,
    pub trading_days: usize,
    pub bins: usize,
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeriesManifest {
    pub series: Vec<SeriesEntry>,
}

impl SeriesManifest {
    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn of_interval(&self, interval: SamplingInterval) -> impl Iterator<Item = &SeriesEntry> {
        self.series.iter().filter(move |e| e.interval == interval)
    }

    pub fn intervals(&self) -> Vec<SamplingInterval> {
        let mut v: Vec<SamplingInterval> = self.series.iter().map(|e| e.interval).collect();
        v.sort_by_key(|i| i.trading_minutes());
        v.dedup();
        v
    }
}

/// Writes `series` to `dir/<instrument>_<interval>.csv` and returns its
/// manifest entry.
pub fn save_series(dir: &Path, series: &ActivitySeries) -> Result<SeriesEntry> {
    let file = PathBuf::from(format!("{}_{}.csv", series.instrument(), series.interval()));
    write_series_csv(&dir.join(&file), series)?;
    Ok(SeriesEntry {
        instrument: series.instrument().to_string(),
        interval: series.interval(),
        trading_days: series.trading_day_count(),
        bins: series.len(),
        file,
    })
}

/// Loads every series of `interval` listed in the manifest at `manifest_path`.
pub fn load_series(
    manifest_path: &Path,
    interval: SamplingInterval,
) -> Result<Vec<ActivitySeries>> {
    let manifest = SeriesManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    manifest
        .of_interval(interval)
        .map(|e| read_series_csv(&dir.join(&e.file), e))
        .collect()
}

/// Columns `slot_start_minute,A,count`.
pub fn write_pattern_csv(path: &Path, p: &IntradayPattern) -> Result<()> {
    let rows = (0..p.slot_count()).map(|s| {
        [
            p.slot_start(s).to_string(),
            num(p.values[s]),
            p.counts[s].to_string(),
        ]
    });
    write_table(path, &["slot_start_minute", "A", "count"], rows)
}

/// Columns `slot,slot_start_minute,mean,std`.
pub fn write_market_pattern_csv(path: &Path, p: &MarketPattern) -> Result<()> {
    let rows = p.mean.iter().zip(&p.std).enumerate().map(|(s, (m, sd))| {
        [
            s.to_string(),
            (s as u32 * p.slot_minutes).to_string(),
            num(*m),
            num(*sd),
        ]
    });
    write_table(path, &["slot", "slot_start_minute", "mean", "std"], rows)
}

/// Long format: one row per (label, bin) with columns `label,x,density,count`.
pub fn write_pdf_csv(path: &Path, pdfs: &[(String, PdfEstimate)]) -> Result<()> {
    let rows = pdfs.iter().flat_map(|(label, p)| {
        p.centers
            .iter()
            .zip(&p.densities)
            .zip(&p.counts)
            .map(move |((x, d), c)| [label.clone(), num(*x), num(*d), c.to_string()])
    });
    write_table(path, &["label", "x", "density", "count"], rows)
}

/// Columns `center,count,mean_g,std_g,lo,hi,sufficient`.
pub fn write_binned_stat_csv(path: &Path, stat: &BinnedStat) -> Result<()> {
    let rows = stat.bins.iter().map(|b| {
        [
            num(b.center),
            b.count.to_string(),
            num(b.mean),
            num(b.std),
            num(b.lo),
            num(b.hi),
            b.sufficient.to_string(),
        ]
    });
    write_table(
        path,
        &[
            "center",
            "count",
            "mean_g",
            "std_g",
            "lo",
            "hi",
            "sufficient",
        ],
        rows,
    )
}

/// Columns `instrument,window,F`.
pub fn write_dfa_points_csv<'a, I>(path: &Path, curves: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a [DfaPoint])>,
{
    let rows = curves.into_iter().flat_map(|(sym, pts)| {
        pts.iter()
            .map(move |p| [sym.to_string(), p.window.to_string(), num(p.fluctuation)])
    });
    write_table(path, &["instrument", "window", "F"], rows)
}

/// Columns `symbol,H,stderr,mean_daily_V`.
pub fn write_cross_section_csv(path: &Path, cs: &HurstCrossSection) -> Result<()> {
    let rows = cs.entries.iter().map(|e| {
        [
            e.instrument.clone(),
            num(e.h),
            num(e.stderr),
            num(e.mean_daily_value),
        ]
    });
    write_table(path, &["symbol", "H", "stderr", "mean_daily_V"], rows)
}

/// Columns `lo,hi,count,mean_ln_V,mean_H,std_H`.
pub fn write_hurst_vs_size_csv(path: &Path, r: &HurstVsSize) -> Result<()> {
    let rows = r.bins.iter().map(|b| {
        [
            num(b.lo),
            num(b.hi),
            b.count.to_string(),
            num(b.mean_ln_value),
            num(b.mean_h),
            num(b.std_h),
        ]
    });
    write_table(
        path,
        &["lo", "hi", "count", "mean_ln_V", "mean_H", "std_H"],
        rows,
    )
}

/// Columns `target_H,measured_H,stderr_H,beta,stderr_beta,one_minus_H,error`.
pub fn write_relation_csv(path: &Path, report: &RelationExperimentReport) -> Result<()> {
    let rows = report.rows.iter().map(|r| {
        [
            num(r.target_h),
            num(r.measured_h),
            num(r.stderr_h),
            num(r.beta),
            num(r.stderr_beta),
            num(r.one_minus_h),
            r.error.clone().unwrap_or_default(),
        ]
    });
    write_table(
        path,
        &[
            "target_H",
            "measured_H",
            "stderr_H",
            "beta",
            "stderr_beta",
            "one_minus_H",
            "error",
        ],
        rows,
    )
}
