//! Raw blockchain and price data to the trivariate event stream.
//!
//! Marks of the trivariate stream: 1 = block arrival, 2 = positive price
//! jump, 3 = negative price jump (0, 1, 2 internally).

mod blocks;
mod events;
mod jumps;
mod prices;

use chrono::{DateTime, Datelike, NaiveDateTime, Utc};

pub use blocks::{
    clean_blocks, read_blocks_csv, write_blocks_csv, BlockRecord, CleaningReport, DroppedDuplicate, ReorderedBlock,
    TieWarning,
};
pub use events::{
    build_trivariate, read_events_csv, write_events_csv, DroppedCounts, Trivariate, MARK_BLOCK, MARK_DOWN, MARK_UP,
};
pub use jumps::{empirical_quantile, extract_jumps, read_jumps_csv, write_jumps_csv, JumpConfig, Jumps};
pub use prices::{log_returns, read_prices_csv, GapRecord, LogReturn, LogReturns, PriceBar, BAR_SECONDS};

/// Parses ISO-8601 / RFC 3339 (a missing offset means UTC) or integer Unix seconds.
/// Years outside 0000-9999 are rejected so every accepted value formats back.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    let ts = parse_any(raw.trim())?;
    if !(0..=9999).contains(&ts.year()) {
        return Err(format!("timestamp {:?} is outside years 0000-9999", raw.trim()));
    }
    Ok(ts)
}

fn parse_any(s: &str) -> Result<DateTime<Utc>, String> {
    if !s.is_empty()
        && s.bytes()
            .enumerate()
            .all(|(k, b)| b.is_ascii_digit() || (k == 0 && b == b'-'))
    {
        let secs: i64 = s.parse().map_err(|e| format!("bad Unix timestamp {s:?}: {e}"))?;
        return DateTime::from_timestamp(secs, 0).ok_or_else(|| format!("Unix timestamp {s} out of range"));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(naive.and_utc());
        }
    }
    Err(format!("unrecognized timestamp {s:?}"))
}

/// `YYYY-MM-DDTHH:MM:SSZ`, with fractional seconds only when present.
pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    if ts.timestamp_subsec_nanos() == 0 {
        ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
    } else {
        ts.format("%Y-%m-%dT%H:%M:%S%.fZ").to_string()
    }
}

pub(crate) fn csv_error(e: csv::Error) -> crate::Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    crate::Error::parse_row(line, e.to_string())
}

/// Checks the header row against the expected column names.
pub(crate) fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> crate::Result<()> {
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(crate::Error::parse_row(
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}
