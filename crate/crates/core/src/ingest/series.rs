use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, NaiveDateTime};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{session_open, Calendar, SamplingInterval, TradeRecord, SESSION_MINUTES};
use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

/// Aggregate activity of one bin: trading value `value` (V), trade count
/// `trades` (N) and share volume `volume` (Q).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActivityBin {
    pub value: f64,
    pub trades: u64,
    pub volume: u64,
}

/// Regular-grid activity series of one instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySeries {
    instrument: String,
    interval: SamplingInterval,
    starts: Vec<NaiveDateTime>,
    bins: Vec<ActivityBin>,
    trading_day_count: usize,
}

impl ActivitySeries {
    /// Assembles a series from parts, checking the grid invariants.
    pub fn from_parts(
        instrument: impl Into<String>,
        interval: SamplingInterval,
        starts: Vec<NaiveDateTime>,
        bins: Vec<ActivityBin>,
        trading_day_count: usize,
    ) -> Result<Self> {
        if starts.len() != bins.len() {
            return Err(Error::Incompatible(format!(
                "{} bin timestamps for {} bins",
                starts.len(),
                bins.len()
            )));
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "bin timestamps must be strictly increasing".into(),
            ));
        }
        if let SamplingInterval::Intraday { minutes } = interval {
            for s in &starts {
                let offset = (s.time() - session_open()).num_minutes();
                if offset < 0 || offset >= SESSION_MINUTES as i64 || offset % minutes as i64 != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "bin start {s} is not on the {interval} session grid"
                    )));
                }
            }
        }
        Ok(ActivitySeries {
            instrument: instrument.into(),
            interval,
            starts,
            bins,
            trading_day_count,
        })
    }

    pub fn instrument(&self) -> &str {
        &self.instrument
    }

    pub fn interval(&self) -> SamplingInterval {
        self.interval
    }

    pub fn starts(&self) -> &[NaiveDateTime] {
        &self.starts
    }

    pub fn bins(&self) -> &[ActivityBin] {
        &self.bins
    }

    pub fn trading_day_count(&self) -> usize {
        self.trading_day_count
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// V(t) as a plain vector.
    pub fn values(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.value).collect()
    }

    /// Minutes since the session open of each bin (zero for multi-day bins).
    pub fn intraday_offsets(&self) -> Vec<u32> {
        self.starts
            .iter()
            .map(|s| (s.time() - session_open()).num_minutes().max(0) as u32)
            .collect()
    }

    /// Number of sessions spanned by the grid.
    pub fn session_count(&self) -> usize {
        match self.interval {
            SamplingInterval::Intraday { .. } => {
                let per = self.interval.bins_per_session().unwrap();
                self.bins.len() / per
            }
            SamplingInterval::MultiDay { days } => self.bins.len() * days as usize,
        }
    }

    /// Per-session averages of (V, N, Q) over the whole grid.
    pub fn daily_means(&self) -> (f64, f64, f64) {
        let sessions = self.session_count();
        if sessions == 0 {
            return (0.0, 0.0, 0.0);
        }
        let v: CompensatedSum = self.bins.iter().map(|b| b.value).collect();
        let n: u64 = self.bins.iter().map(|b| b.trades).sum();
        let q: u64 = self.bins.iter().map(|b| b.volume).sum();
        let s = sessions as f64;
        (v.value() / s, n as f64 / s, q as f64 / s)
    }

    /// Same grid with V replaced; N and Q are kept.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.bins.len() {
            return Err(Error::Incompatible(format!(
                "{} values for a {}-bin series",
                values.len(),
                self.bins.len()
            )));
        }
        let bins = self
            .bins
            .iter()
            .zip(values)
            .map(|(b, value)| ActivityBin { value, ..*b })
            .collect();
        Ok(ActivitySeries {
            bins,
            ..self.clone()
        })
    }
}

/// Aggregates one instrument's trades onto the calendar grid.
///
/// Intraday intervals produce `390 / minutes` bins for every calendar
/// session; a print at exactly 16:00:00 lands in the last bin. Multi-day
/// intervals group consecutive calendar sessions from the first date and
/// drop the trailing partial group. Empty bins are kept as zeros.
pub fn aggregate(
    instrument: &str,
    trades: &[TradeRecord],
    interval: SamplingInterval,
    calendar: &Calendar,
) -> Result<ActivitySeries> {
    let mut order: Vec<&TradeRecord> = trades.iter().collect();
    order.sort_by_key(|a| a.sort_key());

    let open = session_open();
    let (bin_count, starts) = grid(interval, calendar);
    let mut values = vec![CompensatedSum::new(); bin_count];
    let mut bins = vec![ActivityBin::default(); bin_count];
    let mut days = BTreeSet::new();

    for t in order {
        if t.instrument != instrument {
            return Err(Error::Incompatible(format!(
                "trade for {} passed to aggregation of {instrument}",
                t.instrument
            )));
        }
        let date = t.timestamp.date();
        let day = calendar
            .index_of(date)
            .ok_or(Error::DateNotInCalendar(date))?;
        let offset = (t.timestamp.time() - open).num_seconds();
        if offset < 0 || offset > SESSION_MINUTES as i64 * 60 {
            return Err(Error::InvalidParameter(format!(
                "trade at {} is outside the regular session",
                t.timestamp
            )));
        }
        days.insert(day);
        let idx = match interval {
            SamplingInterval::Intraday { minutes } => {
                let per = (SESSION_MINUTES / minutes) as usize;
                let slot = ((offset / (minutes as i64 * 60)) as usize).min(per - 1);
                day * per + slot
            }
            SamplingInterval::MultiDay { days } => day / days as usize,
        };
        if idx >= bin_count {
            // trailing partial multi-day group
            continue;
        }
        values[idx].add(t.value());
        bins[idx].trades += 1;
        bins[idx].volume += t.shares;
    }
    for (b, v) in bins.iter_mut().zip(&values) {
        b.value = v.value();
    }
    Ok(ActivitySeries {
        instrument: instrument.to_string(),
        interval,
        starts,
        bins,
        trading_day_count: days.len(),
    })
}

fn grid(interval: SamplingInterval, calendar: &Calendar) -> (usize, Vec<NaiveDateTime>) {
    let open = session_open();
    match interval {
        SamplingInterval::Intraday { minutes } => {
            let per = (SESSION_MINUTES / minutes) as usize;
            let starts = calendar
                .dates()
                .iter()
                .flat_map(|d| {
                    let base = d.and_time(open);
                    (0..per).map(move |k| base + Duration::minutes((k as u32 * minutes) as i64))
                })
                .collect::<Vec<_>>();
            (starts.len(), starts)
        }
        SamplingInterval::MultiDay { days } => {
            let groups = calendar.len() / days as usize;
            let starts = (0..groups)
                .map(|g| calendar.dates()[g * days as usize].and_time(open))
                .collect();
            (groups, starts)
        }
    }
}

/// Aggregates every instrument concurrently.
pub fn aggregate_universe(
    trades: &BTreeMap<String, Vec<TradeRecord>>,
    interval: SamplingInterval,
    calendar: &Calendar,
) -> Result<BTreeMap<String, ActivitySeries>> {
    trades
        .par_iter()
        .map(|(sym, t)| aggregate(sym, t, interval, calendar).map(|s| (sym.clone(), s)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}
