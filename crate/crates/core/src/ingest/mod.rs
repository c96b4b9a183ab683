//! Tick parsing, calendar-grid aggregation and universe selection.

mod calendar;
mod interval;
mod series;
mod trade;
mod universe;

use chrono::NaiveTime;

pub use calendar::Calendar;
pub use interval::{IntervalKind, SamplingInterval};
pub use series::{aggregate, aggregate_universe, ActivityBin, ActivitySeries};
pub use trade::{
    group_by_instrument, parse_trades, read_trade_file, HeaderMode, ParsedTrades, SessionPolicy,
    TradeFormat, TradeRecord,
};
pub use universe::{
    cross_measure_from_averages, cross_measure_report, filter_universe, CrossMeasureReport,
    ExclusionReport, InstrumentAverages,
};

/// Length of the regular session, 09:30 to 16:00.
pub const SESSION_MINUTES: u32 = 390;

pub fn session_open() -> NaiveTime {
    NaiveTime::from_hms_opt(9, 30, 0).unwrap()
}

pub fn session_close() -> NaiveTime {
    NaiveTime::from_hms_opt(16, 0, 0).unwrap()
}
