use std::io::{Read, Write};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::prices::{LogReturn, BAR_SECONDS};
use super::{check_header, csv_error, format_timestamp, parse_timestamp};
use crate::error::{Error, Result, RowError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JumpConfig {
    /// Length of the trailing history, in hours.
    pub window_hours: f64,
    pub q_low: f64,
    pub q_high: f64,
    /// Returns with a shorter history are not classified.
    pub min_history: usize,
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig {
            window_hours: 3.0,
            q_low: 0.10,
            q_high: 0.90,
            min_history: 12,
        }
    }
}

impl JumpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_hours.is_finite() && self.window_hours * 3600.0 >= 2.0 * BAR_SECONDS as f64) {
            return Err(Error::Config(format!(
                "window of {} h is shorter than two {}-second bars",
                self.window_hours, BAR_SECONDS
            )));
        }
        if !(0.0 <= self.q_low && self.q_low < self.q_high && self.q_high <= 1.0) {
            return Err(Error::Config(format!(
                "quantiles must satisfy 0 <= q_low < q_high <= 1, got {} and {}",
                self.q_low, self.q_high
            )));
        }
        if self.min_history == 0 {
            return Err(Error::Config("min_history must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Jumps {
    pub up: Vec<DateTime<Utc>>,
    pub down: Vec<DateTime<Utc>>,
    /// Returns left unclassified for lack of history.
    pub skipped: usize,
}

/// Empirical quantile with plotting positions `p (n + 1)` on the sorted
/// sample, interpolating linearly and clamping to the extremes.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    let h = p * (n + 1) as f64;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1])
}

/// Flags returns outside the rolling quantile band of their trailing history.
///
/// The history of the return at `t` is every return in `[t - window, t)`.
/// A return strictly above the upper threshold is an up jump, strictly below
/// the lower threshold a down jump.
pub fn extract_jumps(returns: &[LogReturn], config: &JumpConfig) -> Result<Jumps> {
    config.validate()?;
    if let Some(k) = returns.windows(2).position(|w| w[1].timestamp <= w[0].timestamp) {
        return Err(Error::invalid(format!(
            "returns must be strictly time-ordered; return {} is not after return {}",
            k + 2,
            k + 1
        )));
    }
    let window = Duration::milliseconds((config.window_hours * 3_600_000.0).round() as i64);
    let mut jumps = Jumps::default();
    let mut history: Vec<f64> = Vec::new();
    let mut start = 0;
    for (k, r) in returns.iter().enumerate() {
        if k > 0 {
            insert_sorted(&mut history, returns[k - 1].value);
        }
        while returns[start].timestamp < r.timestamp - window {
            remove_sorted(&mut history, returns[start].value);
            start += 1;
        }
        if history.len() < config.min_history {
            jumps.skipped += 1;
            continue;
        }
        let upper = empirical_quantile(&history, config.q_high);
        let lower = empirical_quantile(&history, config.q_low);
        if r.value > upper {
            jumps.up.push(r.timestamp);
        } else if r.value < lower {
            jumps.down.push(r.timestamp);
        }
    }
    Ok(jumps)
}

/// Writes `timestamp,direction` rows (`up` or `down`) in time order.
pub fn write_jumps_csv<W: Write>(output: W, jumps: &Jumps) -> Result<()> {
    let mut rows: Vec<(DateTime<Utc>, &str)> = jumps
        .up
        .iter()
        .map(|t| (*t, "up"))
        .chain(jumps.down.iter().map(|t| (*t, "down")))
        .collect();
    rows.sort();
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["timestamp", "direction"]).map_err(csv_error)?;
    for (t, dir) in rows {
        w.write_record([format_timestamp(&t).as_str(), dir])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the output of [`write_jumps_csv`]. Every malformed row is reported.
pub fn read_jumps_csv<R: Read>(input: R) -> Result<Jumps> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(reader.headers().map_err(csv_error)?, &["timestamp", "direction"])?;
    let mut jumps = Jumps::default();
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
        match (parse_timestamp(&row[0]), &row[1]) {
            (Ok(t), "up") => jumps.up.push(t),
            (Ok(t), "down") => jumps.down.push(t),
            (Ok(_), other) => errors.push(RowError {
                line,
                message: format!("direction must be up or down, got {other:?}"),
            }),
            (Err(message), _) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(jumps)
    } else {
        Err(Error::Parse(errors))
    }
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|y| y.total_cmp(&x).is_lt());
    v.insert(pos, x);
}

fn remove_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|y| y.total_cmp(&x).is_lt());
    debug_assert!(pos < v.len() && v[pos].total_cmp(&x).is_eq());
    v.remove(pos);
}
