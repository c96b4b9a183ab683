use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SESSION_MINUTES;
use crate::error::Error;

/// Width of the aggregation bins.
///
/// Intraday lengths must divide the 390-minute session. Multi-day intervals
/// group consecutive session dates of the calendar; `1d` is the one-session
/// case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SamplingInterval {
    Intraday { minutes: u32 },
    MultiDay { days: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    Intraday,
    MultiDay,
}

impl SamplingInterval {
    pub const FIVE_MINUTES: Self = SamplingInterval::Intraday { minutes: 5 };
    pub const THIRTY_MINUTES: Self = SamplingInterval::Intraday { minutes: 30 };
    pub const ONE_DAY: Self = SamplingInterval::MultiDay { days: 1 };
    pub const FIVE_DAYS: Self = SamplingInterval::MultiDay { days: 5 };
    pub const TWENTY_DAYS: Self = SamplingInterval::MultiDay { days: 20 };

    pub fn intraday(minutes: u32) -> Result<Self, Error> {
        if minutes == 0 || !SESSION_MINUTES.is_multiple_of(minutes) {
            return Err(Error::InvalidInterval(format!(
                "{minutes} minutes does not divide the {SESSION_MINUTES}-minute session"
            )));
        }
        Ok(SamplingInterval::Intraday { minutes })
    }

    pub fn days(days: u32) -> Result<Self, Error> {
        if days == 0 {
            return Err(Error::InvalidInterval("zero-day interval".into()));
        }
        Ok(SamplingInterval::MultiDay { days })
    }

    /// The five intervals of the standard analysis.
    pub fn standard() -> Vec<Self> {
        vec![
            Self::FIVE_MINUTES,
            Self::THIRTY_MINUTES,
            Self::ONE_DAY,
            Self::FIVE_DAYS,
            Self::TWENTY_DAYS,
        ]
    }

    pub fn kind(&self) -> IntervalKind {
        match self {
            SamplingInterval::Intraday { .. } => IntervalKind::Intraday,
            SamplingInterval::MultiDay { .. } => IntervalKind::MultiDay,
        }
    }

    pub fn is_intraday(&self) -> bool {
        self.kind() == IntervalKind::Intraday
    }

    /// Interval length in trading minutes (a session counts 390).
    pub fn trading_minutes(&self) -> u32 {
        match *self {
            SamplingInterval::Intraday { minutes } => minutes,
            SamplingInterval::MultiDay { days } => days * SESSION_MINUTES,
        }
    }

    /// Bins per session for intraday intervals.
    pub fn bins_per_session(&self) -> Option<usize> {
        match *self {
            SamplingInterval::Intraday { minutes } => Some((SESSION_MINUTES / minutes) as usize),
            SamplingInterval::MultiDay { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SamplingInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingInterval::Intraday { minutes } => write!(f, "{minutes}m"),
            SamplingInterval::MultiDay { days } => write!(f, "{days}d"),
        }
    }
}

impl FromStr for SamplingInterval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::InvalidInterval(format!("cannot parse {s:?} (expected e.g. 5m, 1d)"));
        let split = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let (num, unit) = s.split_at(split);
        let n: u32 = num.parse().map_err(|_| bad())?;
        match unit {
            "m" | "min" => Self::intraday(n),
            "d" | "day" => Self::days(n),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for SamplingInterval {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<SamplingInterval> for String {
    fn from(i: SamplingInterval) -> String {
        i.to_string()
    }
}
