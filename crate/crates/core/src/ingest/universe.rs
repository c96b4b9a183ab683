use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::ActivitySeries;
use crate::error::{Error, Result};
use crate::stats::{self, LinearFit};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub min_days: usize,
    /// Excluded symbols with their trading-day counts.
    pub excluded: Vec<(String, usize)>,
    pub retained: usize,
}

/// Keeps the instruments traded on at least `min_days` sessions.
pub fn filter_universe(
    series: BTreeMap<String, ActivitySeries>,
    min_days: usize,
) -> Result<(BTreeMap<String, ActivitySeries>, ExclusionReport)> {
    if min_days == 0 {
        return Err(Error::InvalidParameter(
            "min_days must be at least 1".into(),
        ));
    }
    if series.is_empty() {
        warn!("filter_universe called on an empty universe");
    }
    let mut report = ExclusionReport {
        min_days,
        ..Default::default()
    };
    let kept: BTreeMap<_, _> = series
        .into_iter()
        .filter(|(sym, s)| {
            let keep = s.trading_day_count() >= min_days;
            if !keep {
                report.excluded.push((sym.clone(), s.trading_day_count()));
            }
            keep
        })
        .collect();
    report.retained = kept.len();
    Ok((kept, report))
}

/// Per-session averages of one instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentAverages {
    pub instrument: String,
    pub mean_value: f64,
    pub mean_trades: f64,
    pub mean_volume: f64,
}

impl InstrumentAverages {
    pub fn of(series: &ActivitySeries) -> Self {
        let (v, n, q) = series.daily_means();
        InstrumentAverages {
            instrument: series.instrument().to_string(),
            mean_value: v,
            mean_trades: n,
            mean_volume: q,
        }
    }
}

/// How strongly trade count and share volume track trading value across
/// instruments, in log-log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMeasureReport {
    pub instruments: Vec<InstrumentAverages>,
    pub excluded: Vec<String>,
    pub pearson_log_nv: f64,
    pub pearson_log_qv: f64,
    /// ln<N> regressed on ln<V>.
    pub exponent_nv: LinearFit,
    /// ln<Q> regressed on ln<V>.
    pub exponent_qv: LinearFit,
}

pub fn cross_measure_report(
    universe: &BTreeMap<String, ActivitySeries>,
) -> Result<CrossMeasureReport> {
    cross_measure_from_averages(universe.values().map(InstrumentAverages::of).collect())
}

pub fn cross_measure_from_averages(
    averages: Vec<InstrumentAverages>,
) -> Result<CrossMeasureReport> {
    let (instruments, zero): (Vec<_>, Vec<_>) = averages
        .into_iter()
        .partition(|a| a.mean_value > 0.0 && a.mean_trades > 0.0 && a.mean_volume > 0.0);
    let excluded: Vec<String> = zero.into_iter().map(|a| a.instrument).collect();
    for sym in &excluded {
        warn!("{sym}: zero average activity, excluded from the cross-measure report");
    }

    let lv: Vec<f64> = instruments.iter().map(|a| a.mean_value.ln()).collect();
    let ln: Vec<f64> = instruments.iter().map(|a| a.mean_trades.ln()).collect();
    let lq: Vec<f64> = instruments.iter().map(|a| a.mean_volume.ln()).collect();

    if instruments.len() >= 2 {
        let (_, sd) = stats::mean_std(&lv).unwrap();
        if sd == 0.0 {
            return Err(Error::Degenerate(
                "all instruments have the same average trading value".into(),
            ));
        }
    }
    if instruments.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "cross-measure report needs 3 instruments with activity, got {}",
            instruments.len()
        )));
    }
    let degenerate = || Error::Degenerate("zero spread in log averages".into());
    Ok(CrossMeasureReport {
        pearson_log_nv: stats::pearson(&ln, &lv).ok_or_else(degenerate)?,
        pearson_log_qv: stats::pearson(&lq, &lv).ok_or_else(degenerate)?,
        exponent_nv: stats::linear_fit(&lv, &ln)?,
        exponent_qv: stats::linear_fit(&lv, &lq)?,
        instruments,
        excluded,
    })
}
