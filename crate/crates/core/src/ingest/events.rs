use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::blocks::BlockRecord;
use super::{check_header, csv_error};
use crate::error::{Error, Result, RowError};
use crate::hawkes::{Event, EventSequence};

/// 0-based marks of the trivariate stream.
pub const MARK_BLOCK: usize = 0;
pub const MARK_UP: usize = 1;
pub const MARK_DOWN: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Trivariate {
    pub sequence: EventSequence,
    /// Events dropped for falling outside the window, per stream.
    pub dropped: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DroppedCounts {
    pub blocks: usize,
    pub up: usize,
    pub down: usize,
}

impl Trivariate {
    pub fn dropped_counts(&self) -> DroppedCounts {
        DroppedCounts {
            blocks: self.dropped[0],
            up: self.dropped[1],
            down: self.dropped[2],
        }
    }
}

/// Merges block arrivals and up/down jumps into one sequence on
/// `[start, end]`, in hours since `start`.
pub fn build_trivariate(
    blocks: &[BlockRecord],
    up: &[DateTime<Utc>],
    down: &[DateTime<Utc>],
    start: DateTime<Utc>,
    end: DateTime<Utc>,
) -> Result<Trivariate> {
    if end <= start {
        return Err(Error::Config(format!("empty window [{start}, {end}]")));
    }
    let hours = |ts: DateTime<Utc>| (ts - start).num_milliseconds() as f64 / 3_600_000.0;
    let horizon = hours(end);
    let mut events = Vec::with_capacity(blocks.len() + up.len() + down.len());
    let mut dropped = [0usize; 3];
    let streams: [(usize, Vec<DateTime<Utc>>); 3] = [
        (MARK_BLOCK, blocks.iter().map(|b| b.timestamp).collect()),
        (MARK_UP, up.to_vec()),
        (MARK_DOWN, down.to_vec()),
    ];
    for (mark, times) in streams {
        for ts in times {
            if ts < start || ts > end {
                dropped[mark] += 1;
            } else {
                events.push(Event::new(hours(ts), mark));
            }
        }
    }
    let sequence = EventSequence::from_unsorted(events, horizon, 3)?;
    Ok(Trivariate { sequence, dropped })
}

/// Reads `time_hours,mark` with 1-based marks.
///
/// `horizon` defaults to the last event time and `dim` to the largest mark.
pub fn read_events_csv<R: Read>(input: R, horizon: Option<f64>, dim: Option<usize>) -> Result<EventSequence> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(reader.headers().map_err(csv_error)?, &["time_hours", "mark"])?;
    let mut events = Vec::new();
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
        let time: std::result::Result<f64, _> = row[0].parse();
        let mark: std::result::Result<usize, _> = row[1].parse();
        match (time, mark) {
            (Ok(t), Ok(m)) if t.is_finite() && t >= 0.0 && m >= 1 => events.push(Event::new(t, m - 1)),
            (Ok(t), Ok(m)) => errors.push(RowError {
                line,
                message: format!("time must be finite and >= 0 and mark >= 1, got {t}, {m}"),
            }),
            _ => errors.push(RowError {
                line,
                message: format!("cannot parse {:?},{:?}", &row[0], &row[1]),
            }),
        }
    }
    if !errors.is_empty() {
        return Err(Error::Parse(errors));
    }
    let max_mark = events.iter().map(|e| e.mark + 1).max().unwrap_or(1);
    let dim = dim.unwrap_or(max_mark);
    let horizon = horizon.unwrap_or_else(|| events.iter().map(|e| e.time).fold(0.0, f64::max));
    EventSequence::from_unsorted(events, horizon, dim)
}

/// Writes `time_hours,mark` with 1-based marks. Times use the shortest
/// decimal that reads back to the same `f64`.
pub fn write_events_csv<W: Write>(output: W, seq: &EventSequence) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["time_hours", "mark"]).map_err(csv_error)?;
    for ev in seq.events() {
        w.write_record([ev.time.to_string(), (ev.mark + 1).to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
