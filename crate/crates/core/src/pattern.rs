//! Intraday activity pattern A(s) and deseasonalization.
//!
//! `A(s)` is the mean trading value of the bins falling in intraday slot `s`
//! divided by the mean over all bins. Every slot holds the same number of
//! bins per session, so the plain mean of `A` over slots is 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ActivitySeries, SamplingInterval, SESSION_MINUTES};
use crate::stats::{self, CompensatedSum};

/// Slot length of the market-wide pattern report.
pub const REPORT_SLOT_MINUTES: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayPattern {
    pub instrument: String,
    pub slot_minutes: u32,
    pub values: Vec<f64>,
    /// Number of series bins that contributed to each slot.
    pub counts: Vec<usize>,
}

impl IntradayPattern {
    pub fn slot_count(&self) -> usize {
        self.values.len()
    }

    /// Slot start in minutes after the open.
    pub fn slot_start(&self, slot: usize) -> u32 {
        slot as u32 * self.slot_minutes
    }

    /// Count-weighted mean of A(s); 1 for any pattern built by [`intraday_pattern`].
    pub fn weighted_mean(&self) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let s: CompensatedSum = self
            .values
            .iter()
            .zip(&self.counts)
            .map(|(a, &c)| a * c as f64)
            .collect();
        s.value() / total as f64
    }
}

fn bin_minutes(series: &ActivitySeries) -> Result<u32> {
    match series.interval() {
        SamplingInterval::Intraday { minutes } => Ok(minutes),
        other => Err(Error::Incompatible(format!(
            "intraday pattern needs an intraday series, got {other}"
        ))),
    }
}

fn check_slot(slot_minutes: u32, bin: u32) -> Result<()> {
    if slot_minutes == 0 || !SESSION_MINUTES.is_multiple_of(slot_minutes) {
        return Err(Error::InvalidParameter(format!(
            "slot length {slot_minutes} does not divide the {SESSION_MINUTES}-minute session"
        )));
    }
    if !slot_minutes.is_multiple_of(bin) {
        return Err(Error::Incompatible(format!(
            "slot length {slot_minutes} is not a multiple of the {bin}-minute bins"
        )));
    }
    Ok(())
}

pub fn intraday_pattern(series: &ActivitySeries, slot_minutes: u32) -> Result<IntradayPattern> {
    let bin = bin_minutes(series)?;
    check_slot(slot_minutes, bin)?;
    if series.session_count() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: intraday pattern needs at least 2 sessions, got {}",
            series.instrument(),
            series.session_count()
        )));
    }
    let slots = (SESSION_MINUTES / slot_minutes) as usize;
    let mut sums = vec![CompensatedSum::new(); slots];
    let mut counts = vec![0usize; slots];
    let mut total = CompensatedSum::new();
    for (b, offset) in series.bins().iter().zip(series.intraday_offsets()) {
        let s = (offset / slot_minutes) as usize;
        sums[s].add(b.value);
        counts[s] += 1;
        total.add(b.value);
    }
    let global = total.value() / series.len() as f64;
    if global == 0.0 {
        return Err(Error::Degenerate(format!(
            "{}: zero mean activity, pattern undefined",
            series.instrument()
        )));
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c == 0 {
                0.0
            } else {
                s.value() / c as f64 / global
            }
        })
        .collect();
    Ok(IntradayPattern {
        instrument: series.instrument().to_string(),
        slot_minutes,
        values,
        counts,
    })
}

/// Cross-instrument slot statistics (population std).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketPattern {
    pub slot_minutes: u32,
    pub instruments: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn market_pattern(patterns: &[IntradayPattern]) -> Result<MarketPattern> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::InsufficientData("no patterns to combine".into()))?;
    if let Some(p) = patterns
        .iter()
        .find(|p| p.slot_minutes != first.slot_minutes || p.values.len() != first.values.len())
    {
        return Err(Error::Incompatible(format!(
            "{} uses {}-minute slots, {} uses {}",
            first.instrument, first.slot_minutes, p.instrument, p.slot_minutes
        )));
    }
    let slots = first.values.len();
    let mut mean = Vec::with_capacity(slots);
    let mut std = Vec::with_capacity(slots);
    let mut column = Vec::with_capacity(patterns.len());
    for s in 0..slots {
        column.clear();
        column.extend(patterns.iter().map(|p| p.values[s]));
        let (m, sd) = stats::mean_std(&column).unwrap();
        mean.push(m);
        std.push(sd);
    }
    Ok(MarketPattern {
        slot_minutes: first.slot_minutes,
        instruments: patterns.len(),
        mean,
        std,
    })
}

/// Divides each V(t) by the pattern value of its slot.
///
/// A slot with `A(s) = 0` can only hold zero activity; it is left at zero.
pub fn deseasonalize(series: &ActivitySeries, pattern: &IntradayPattern) -> Result<ActivitySeries> {
    let bin = bin_minutes(series)?;
    check_slot(pattern.slot_minutes, bin)?;
    let mut adjusted = Vec::with_capacity(series.len());
    for (b, offset) in series.bins().iter().zip(series.intraday_offsets()) {
        let s = (offset / pattern.slot_minutes) as usize;
        let a = pattern.values[s];
        let v = if a == 0.0 {
            if b.value != 0.0 {
                return Err(Error::Degenerate(format!(
                    "{}: slot at +{} min has A(s) = 0 but V = {}",
                    series.instrument(),
                    pattern.slot_start(s),
                    b.value
                )));
            }
            0.0
        } else {
            b.value / a
        };
        adjusted.push(v);
    }
    series.with_values(adjusted)
}
