use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use chrono::{NaiveDateTime, NaiveTime};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::{session_close, session_open};
use crate::error::{Error, Result};

/// One executed trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub timestamp: NaiveDateTime,
    pub instrument: String,
    pub price: f64,
    pub shares: u64,
}

impl TradeRecord {
    pub fn value(&self) -> f64 {
        self.price * self.shares as f64
    }

    /// Total order used to make aggregation independent of input order.
    pub(crate) fn sort_key(&self) -> (NaiveDateTime, u64, u64) {
        (self.timestamp, self.price.to_bits(), self.shares)
    }
}

/// What to do with a well-formed trade stamped outside 09:30-16:00.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionPolicy {
    /// The whole stream is rejected.
    RejectFile,
    #[default]
    DropRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeaderMode {
    /// Skip the first row if its timestamp column does not parse.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeFormat {
    pub delimiter: u8,
    pub header: HeaderMode,
    pub session_policy: SessionPolicy,
}

impl Default for TradeFormat {
    fn default() -> Self {
        TradeFormat {
            delimiter: b',',
            header: HeaderMode::Auto,
            session_policy: SessionPolicy::DropRow,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedTrades {
    pub records: Vec<TradeRecord>,
    /// Rows that parsed but violate a record invariant (nonpositive price or shares).
    pub malformed: usize,
    pub malformed_lines: Vec<usize>,
    pub out_of_session: usize,
}

impl ParsedTrades {
    pub fn extend(&mut self, other: ParsedTrades) {
        self.records.extend(other.records);
        self.malformed += other.malformed;
        self.malformed_lines.extend(other.malformed_lines);
        self.out_of_session += other.out_of_session;
    }
}

const TIMESTAMP_FORMATS: [&str; 4] = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S%.f",
];

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    TIMESTAMP_FORMATS.iter().find_map(|f| {
        NaiveDateTime::parse_from_str(s, f)
            .ok()
            .map(|t| t.with_nanosecond_truncated())
    })
}

trait TruncateNanos {
    fn with_nanosecond_truncated(self) -> Self;
}

impl TruncateNanos for NaiveDateTime {
    fn with_nanosecond_truncated(self) -> Self {
        use chrono::Timelike;
        self.with_nanosecond(0).unwrap_or(self)
    }
}

fn in_session(time: NaiveTime) -> bool {
    time >= session_open() && time <= session_close()
}

/// Parses rows of `timestamp, symbol, price, shares`.
///
/// Structural problems (wrong column count, unparseable fields) abort with
/// the offending line number. Rows that parse but carry a nonpositive price
/// or share count are dropped and counted.
pub fn parse_trades<R: Read>(reader: R, format: &TradeFormat) -> Result<ParsedTrades> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut out = ParsedTrades::default();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        match rdr.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: e.to_string(),
                });
            }
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let is_first = std::mem::replace(&mut first, false);
        if is_first {
            let skip = match format.header {
                HeaderMode::Present => true,
                HeaderMode::Absent => false,
                HeaderMode::Auto => record.get(0).and_then(parse_timestamp).is_none(),
            };
            if skip {
                continue;
            }
        }
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 columns, found {}", record.len()),
            });
        }
        let ts = &record[0];
        let timestamp = parse_timestamp(ts).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad timestamp {ts:?}"),
        })?;
        let instrument = record[1].to_string();
        if instrument.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty symbol".into(),
            });
        }
        let price: f64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad price {:?}", &record[2]),
        })?;
        let shares: i64 = record[3].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad share count {:?}", &record[3]),
        })?;

        if !(price.is_finite() && price > 0.0) || shares <= 0 {
            out.malformed += 1;
            out.malformed_lines.push(line);
            continue;
        }
        if !in_session(timestamp.time()) {
            match format.session_policy {
                SessionPolicy::RejectFile => {
                    return Err(Error::OutOfSession {
                        line,
                        time: timestamp.to_string(),
                    })
                }
                SessionPolicy::DropRow => {
                    out.out_of_session += 1;
                    continue;
                }
            }
        }
        out.records.push(TradeRecord {
            timestamp,
            instrument,
            price,
            shares: shares as u64,
        });
    }
    Ok(out)
}

/// Reads a trade file, transparently decompressing gzip input.
pub fn read_trade_file(path: &Path, format: &TradeFormat) -> Result<ParsedTrades> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 2];
    let gz = {
        use std::io::BufRead;
        let buf = reader.fill_buf().map_err(|e| Error::io(path, e))?;
        if buf.len() >= 2 {
            magic.copy_from_slice(&buf[..2]);
        }
        magic == [0x1f, 0x8b]
    };
    let parsed = if gz {
        parse_trades(MultiGzDecoder::new(reader), format)
    } else {
        parse_trades(reader, format)
    };
    parsed.map_err(|e| match e {
        Error::Parse { line, message } => Error::format(path, format!("line {line}: {message}")),
        Error::OutOfSession { line, time } => Error::format(
            path,
            format!("line {line}: trade at {time} is outside the regular session"),
        ),
        other => other,
    })
}

/// Splits trades by symbol; each group is sorted with the aggregation key.
pub fn group_by_instrument(records: Vec<TradeRecord>) -> BTreeMap<String, Vec<TradeRecord>> {
    let mut map: BTreeMap<String, Vec<TradeRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.instrument.clone()).or_default().push(r);
    }
    for trades in map.values_mut() {
        trades.sort_by_key(|a| a.sort_key());
    }
    map
}
