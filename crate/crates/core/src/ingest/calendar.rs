use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Ordered list of session dates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    dates: Vec<NaiveDate>,
}

impl Calendar {
    /// Builds a calendar from dates in any order; duplicates are collapsed.
    pub fn new(mut dates: Vec<NaiveDate>) -> Self {
        dates.sort_unstable();
        dates.dedup();
        Calendar { dates }
    }

    /// One ISO date per line. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let date = NaiveDate::parse_from_str(line, "%Y-%m-%d").map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad calendar date {line:?}: {e}"),
            })?;
            dates.push(date);
        }
        Ok(Calendar::new(dates))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Calendar::parse(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.dates {
            out.push_str(&d.format("%Y-%m-%d").to_string());
            out.push('\n');
        }
        out
    }
}
