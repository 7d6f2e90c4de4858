use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::{check_header, csv_error, format_timestamp, parse_timestamp};
use crate::error::{Error, Result, RowError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    pub height: u64,
    pub timestamp: DateTime<Utc>,
    pub tx_count: u64,
}

/// Reads `height,timestamp,tx_count`. Every malformed row is reported.
pub fn read_blocks_csv<R: Read>(input: R) -> Result<Vec<BlockRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(
        reader.headers().map_err(csv_error)?,
        &["height", "timestamp", "tx_count"],
    )?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut heights = HashSet::new();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parsed = (|| -> std::result::Result<BlockRecord, String> {
            let height = row[0]
                .parse::<u64>()
                .map_err(|e| format!("bad height {:?}: {e}", &row[0]))?;
            let timestamp = parse_timestamp(&row[1])?;
            let tx_count = row[2]
                .parse::<u64>()
                .map_err(|e| format!("bad tx_count {:?}: {e}", &row[2]))?;
            Ok(BlockRecord {
                height,
                timestamp,
                tx_count,
            })
        })();
        match parsed {
            Ok(rec) if !heights.insert(rec.height) => errors.push(RowError {
                line,
                message: format!("duplicate height {}", rec.height),
            }),
            Ok(rec) => records.push(rec),
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(Error::Parse(errors))
    }
}

pub fn write_blocks_csv<W: Write>(output: W, records: &[BlockRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(["height", "timestamp", "tx_count"]).map_err(csv_error)?;
    for r in records {
        w.write_record([
            r.height.to_string(),
            format_timestamp(&r.timestamp),
            r.tx_count.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// A block removed because another block carries the same timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedDuplicate {
    pub height: u64,
    pub tx_count: u64,
    pub timestamp: String,
    pub kept_height: u64,
    pub kept_tx_count: u64,
}

/// A block whose timestamp is earlier than some block before it in the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReorderedBlock {
    pub height: u64,
    pub timestamp: String,
    pub preceding_max_timestamp: String,
    pub input_position: usize,
    pub output_position: usize,
}

/// Duplicate timestamps with equal transaction counts; the lower height is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TieWarning {
    pub timestamp: String,
    pub kept_height: u64,
    pub dropped_height: u64,
    pub tx_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CleaningReport {
    pub duplicates_dropped: Vec<DroppedDuplicate>,
    pub reordered: Vec<ReorderedBlock>,
    pub ties: Vec<TieWarning>,
}

impl CleaningReport {
    pub fn is_empty(&self) -> bool {
        self.duplicates_dropped.is_empty() && self.reordered.is_empty() && self.ties.is_empty()
    }
}

/// Removes duplicate-timestamp blocks and sorts the rest by timestamp.
///
/// Among blocks sharing a timestamp the one with the most transactions is
/// kept (lower height on a tie). A surviving block counts as reordered when
/// its timestamp is earlier than the latest timestamp seen before it in the
/// input. The output timestamps are strictly increasing.
pub fn clean_blocks(records: &[BlockRecord]) -> Result<(Vec<BlockRecord>, CleaningReport)> {
    if records.is_empty() {
        return Err(Error::invalid("no block records to clean"));
    }
    let mut heights = HashSet::new();
    if let Some(dup) = records.iter().find(|r| !heights.insert(r.height)) {
        return Err(Error::invalid(format!("duplicate height {}", dup.height)));
    }

    let mut report = CleaningReport::default();
    let mut keeper: HashMap<DateTime<Utc>, usize> = HashMap::new();
    for (k, r) in records.iter().enumerate() {
        keeper
            .entry(r.timestamp)
            .and_modify(|best| {
                let b = &records[*best];
                if (r.tx_count, std::cmp::Reverse(r.height)) > (b.tx_count, std::cmp::Reverse(b.height)) {
                    *best = k;
                }
            })
            .or_insert(k);
    }
    let mut survivors = Vec::with_capacity(records.len());
    for (k, r) in records.iter().enumerate() {
        let kept = keeper[&r.timestamp];
        if kept == k {
            survivors.push(r.clone());
            continue;
        }
        let winner = &records[kept];
        report.duplicates_dropped.push(DroppedDuplicate {
            height: r.height,
            tx_count: r.tx_count,
            timestamp: format_timestamp(&r.timestamp),
            kept_height: winner.height,
            kept_tx_count: winner.tx_count,
        });
        if winner.tx_count == r.tx_count {
            report.ties.push(TieWarning {
                timestamp: format_timestamp(&r.timestamp),
                kept_height: winner.height,
                dropped_height: r.height,
                tx_count: r.tx_count,
            });
        }
    }

    let mut order: Vec<usize> = (0..survivors.len()).collect();
    order.sort_by_key(|&k| survivors[k].timestamp);
    let mut output_position = vec![0; survivors.len()];
    for (pos, &k) in order.iter().enumerate() {
        output_position[k] = pos;
    }
    let mut running_max: Option<DateTime<Utc>> = None;
    for (k, r) in survivors.iter().enumerate() {
        match running_max {
            Some(max) if r.timestamp < max => report.reordered.push(ReorderedBlock {
                height: r.height,
                timestamp: format_timestamp(&r.timestamp),
                preceding_max_timestamp: format_timestamp(&max),
                input_position: k,
                output_position: output_position[k],
            }),
            Some(max) if r.timestamp <= max => {}
            _ => running_max = Some(r.timestamp),
        }
    }
    let cleaned = order.into_iter().map(|k| survivors[k].clone()).collect();
    Ok((cleaned, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(height: u64, ts: &str, tx: u64) -> BlockRecord {
        BlockRecord {
            height,
            timestamp: parse_timestamp(ts).unwrap(),
            tx_count: tx,
        }
    }

    #[test]
    fn duplicate_keeps_more_transactions() {
        let input = vec![
            block(719598, "2022-01-20 09:20:00", 1500),
            block(719599, "2022-01-20 09:26:01", 2500),
            block(719600, "2022-01-20 09:30:00", 1200),
            block(719601, "2022-01-20 09:26:01", 800),
            block(719602, "2022-01-20 09:40:00", 1900),
        ];
        let (cleaned, report) = clean_blocks(&input).unwrap();
        assert_eq!(report.duplicates_dropped.len(), 1);
        assert_eq!(report.duplicates_dropped[0].height, 719601);
        assert_eq!(report.duplicates_dropped[0].kept_height, 719599);
        assert!(report.ties.is_empty());
        assert!(report.reordered.is_empty());
        let heights: Vec<u64> = cleaned.iter().map(|b| b.height).collect();
        assert_eq!(heights, vec![719598, 719599, 719600, 719602]);
    }

    #[test]
    fn tie_keeps_lower_height_and_warns() {
        let input = vec![
            block(11, "2022-01-01T00:10:00Z", 7),
            block(10, "2022-01-01T00:10:00Z", 7),
        ];
        let (cleaned, report) = clean_blocks(&input).unwrap();
        assert_eq!(cleaned.len(), 1);
        assert_eq!(cleaned[0].height, 10);
        assert_eq!(report.ties.len(), 1);
        assert_eq!(report.ties[0].dropped_height, 11);
    }

    #[test]
    fn clean_input_is_unchanged() {
        let input = vec![
            block(1, "2022-01-01T00:00:00Z", 5),
            block(2, "2022-01-01T00:09:00Z", 6),
            block(3, "2022-01-01T00:21:00Z", 7),
        ];
        let (cleaned, report) = clean_blocks(&input).unwrap();
        assert_eq!(cleaned, input);
        assert!(report.is_empty());
    }

    #[test]
    fn out_of_order_blocks_are_counted_once() {
        let input = vec![
            block(1, "2022-01-01T00:00:00Z", 5),
            block(2, "2022-01-01T00:20:00Z", 6),
            block(3, "2022-01-01T00:15:00Z", 7),
            block(4, "2022-01-01T00:25:00Z", 7),
        ];
        let (cleaned, report) = clean_blocks(&input).unwrap();
        assert_eq!(report.reordered.len(), 1);
        assert_eq!(report.reordered[0].height, 3);
        assert_eq!(report.reordered[0].output_position, 1);
        let heights: Vec<u64> = cleaned.iter().map(|b| b.height).collect();
        assert_eq!(heights, vec![1, 3, 2, 4]);
    }

    #[test]
    fn empty_and_duplicate_heights_rejected() {
        assert!(clean_blocks(&[]).is_err());
        let input = vec![block(1, "2022-01-01T00:00:00Z", 5), block(1, "2022-01-01T00:05:00Z", 5)];
        assert!(clean_blocks(&input).is_err());
    }

    #[test]
    fn csv_round_trip_and_row_errors() {
        let text = "height,timestamp,tx_count\n1,2022-01-01T00:00:00Z,5\n2,1640995800,6\n";
        let blocks = read_blocks_csv(text.as_bytes()).unwrap();
        assert_eq!(blocks[1].timestamp, parse_timestamp("2022-01-01T00:10:00Z").unwrap());
        let mut out = Vec::new();
        write_blocks_csv(&mut out, &blocks).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "height,timestamp,tx_count\n1,2022-01-01T00:00:00Z,5\n2,2022-01-01T00:10:00Z,6\n"
        );

        let bad = "height,timestamp,tx_count\n1,2022-01-01T00:00:00Z,5\nx,2022-01-01,6\n3,2022-01-01T00:20:00Z,-1\n";
        match read_blocks_csv(bad.as_bytes()) {
            Err(Error::Parse(rows)) => {
                assert_eq!(rows.len(), 2);
                assert_eq!(rows[0].line, 3);
                assert_eq!(rows[1].line, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_blocks_csv("time,tx\n".as_bytes()).is_err());
        assert!(read_blocks_csv("height,timestamp,tx_count\n".as_bytes())
            .unwrap()
            .is_empty());
    }
}
