use std::io::Read;

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::{check_header, csv_error, parse_timestamp};
use crate::error::{Error, Result, RowError};

/// Bar length of the VWAP series.
pub const BAR_SECONDS: i64 = 300;

/// Volume-weighted average price of the bar starting at `timestamp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceBar {
    pub timestamp: DateTime<Utc>,
    pub vwap: f64,
}

/// Reads `timestamp,vwap`; bars must be on the 5-minute grid, strictly
/// increasing, with positive prices.
pub fn read_prices_csv<R: Read>(input: R) -> Result<Vec<PriceBar>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(reader.headers().map_err(csv_error)?, &["timestamp", "vwap"])?;
    let mut bars: Vec<PriceBar> = Vec::new();
    let mut errors = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                errors.push(RowError {
                    line: e.position().map_or(0, |p| p.line() as usize),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parsed = (|| -> std::result::Result<PriceBar, String> {
            let timestamp = parse_timestamp(&row[0])?;
            let vwap: f64 = row[1].parse().map_err(|e| format!("bad vwap {:?}: {e}", &row[1]))?;
            if !(vwap.is_finite() && vwap > 0.0) {
                return Err(format!("vwap must be positive, got {vwap}"));
            }
            if timestamp.timestamp_subsec_nanos() != 0 || timestamp.timestamp().rem_euclid(BAR_SECONDS) != 0 {
                return Err(format!("timestamp {} is not on the 5-minute grid", &row[0]));
            }
            Ok(PriceBar { timestamp, vwap })
        })();
        match parsed {
            Ok(bar) => {
                if let Some(prev) = bars.last() {
                    if bar.timestamp <= prev.timestamp {
                        errors.push(RowError {
                            line,
                            message: "timestamps must be strictly increasing".into(),
                        });
                        continue;
                    }
                }
                bars.push(bar);
            }
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(bars)
    } else {
        Err(Error::Parse(errors))
    }
}

/// `ln(vwap_t) - ln(vwap_{t-1})`, stamped with the later bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogReturn {
    pub timestamp: DateTime<Utc>,
    pub value: f64,
    /// The previous bar is more than one grid step earlier.
    pub gap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapRecord {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub missing_bars: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogReturns {
    pub returns: Vec<LogReturn>,
    pub gaps: Vec<GapRecord>,
}

pub fn log_returns(bars: &[PriceBar]) -> Result<LogReturns> {
    if bars.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 price bars, got {}",
            bars.len()
        )));
    }
    if let Some((k, bar)) = bars
        .iter()
        .enumerate()
        .find(|(_, b)| !(b.vwap.is_finite() && b.vwap > 0.0))
    {
        return Err(Error::Parse(vec![RowError {
            line: k + 1,
            message: format!("vwap must be positive, got {}", bar.vwap),
        }]));
    }
    let mut returns = Vec::with_capacity(bars.len() - 1);
    let mut gaps = Vec::new();
    for (k, w) in bars.windows(2).enumerate() {
        let (prev, cur) = (w[0], w[1]);
        let step = (cur.timestamp - prev.timestamp).num_seconds();
        if step <= 0 {
            return Err(Error::invalid(format!("bar {} is not later than bar {}", k + 2, k + 1)));
        }
        let gap = step > BAR_SECONDS;
        if gap {
            gaps.push(GapRecord {
                from: prev.timestamp,
                to: cur.timestamp,
                missing_bars: step / BAR_SECONDS - 1,
            });
        }
        returns.push(LogReturn {
            timestamp: cur.timestamp,
            value: cur.vwap.ln() - prev.vwap.ln(),
            gap,
        });
    }
    Ok(LogReturns { returns, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bars(prices: &[(i64, f64)]) -> Vec<PriceBar> {
        prices
            .iter()
            .map(|&(slot, vwap)| PriceBar {
                timestamp: DateTime::from_timestamp(1_640_995_200 + slot * BAR_SECONDS, 0).unwrap(),
                vwap,
            })
            .collect()
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let out = log_returns(&bars(&[(0, 40_000.0), (1, 40_000.0), (2, 40_000.0)])).unwrap();
        assert!(out.returns.iter().all(|r| r.value == 0.0));
        assert!(out.gaps.is_empty());
    }

    #[test]
    fn exact_log() {
        let e = std::f64::consts::E;
        let out = log_returns(&bars(&[(0, 100.0), (1, 100.0 * e)])).unwrap();
        assert!((out.returns[0].value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_bar_is_flagged() {
        // 6 grid slots, slot 3 missing: 5 bars, 4 returns, one gap
        let out = log_returns(&bars(&[(0, 1.0), (1, 2.0), (2, 3.0), (4, 4.0), (5, 5.0)])).unwrap();
        assert_eq!(out.returns.len(), 4);
        assert_eq!(out.gaps.len(), 1);
        assert_eq!(out.gaps[0].missing_bars, 1);
        assert!(out.returns[2].gap);
        assert!((out.returns[2].value - (4f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs() {
        assert!(log_returns(&bars(&[(0, 1.0)])).is_err());
        match log_returns(&bars(&[(0, 1.0), (1, 0.0)])) {
            Err(Error::Parse(rows)) => assert_eq!(rows[0].line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_validation() {
        let good = "timestamp,vwap\n2022-01-01T00:00:00Z,47000.5\n2022-01-01T00:05:00Z,47010\n";
        assert_eq!(read_prices_csv(good.as_bytes()).unwrap().len(), 2);
        let bad = "timestamp,vwap\n2022-01-01T00:00:00Z,-3\n2022-01-01T00:07:00Z,47010\n2022-01-01T00:00:00Z,1\n";
        match read_prices_csv(bad.as_bytes()) {
            Err(Error::Parse(rows)) => {
                let lines: Vec<usize> = rows.iter().map(|r| r.line).collect();
                assert_eq!(lines, vec![2, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
