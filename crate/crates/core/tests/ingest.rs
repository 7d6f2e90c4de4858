mod common;

use chainhawkes::ingest::{
    build_trivariate, clean_blocks, extract_jumps, format_timestamp, log_returns, parse_timestamp, read_blocks_csv,
    read_events_csv, read_jumps_csv, read_prices_csv, write_blocks_csv, write_events_csv, write_jumps_csv, BlockRecord,
    JumpConfig, Jumps, LogReturn, PriceBar, BAR_SECONDS, MARK_BLOCK, MARK_DOWN, MARK_UP,
};
use chainhawkes::{Error, Event};
use chrono::{DateTime, Duration, Utc};
use common::rng;
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

fn t0() -> DateTime<Utc> {
    parse_timestamp("2022-01-01T00:00:00Z").unwrap()
}

fn bar_series(values: &[f64]) -> Vec<LogReturn> {
    values
        .iter()
        .enumerate()
        .map(|(k, &value)| LogReturn {
            timestamp: t0() + Duration::seconds(BAR_SECONDS * (k as i64 + 1)),
            value,
            gap: false,
        })
        .collect()
}

#[test]
fn duplicate_timestamp_keeps_larger_block() {
    let csv = "height,timestamp,tx_count\n\
               719598,2022-01-20 09:14:41,2210\n\
               719599,2022-01-20 09:26:01,3011\n\
               719600,2022-01-20 09:25:30,1984\n\
               719601,2022-01-20 09:26:01,377\n\
               719602,2022-01-20 09:40:12,2550\n";
    let blocks = read_blocks_csv(csv.as_bytes()).unwrap();
    let (cleaned, report) = clean_blocks(&blocks).unwrap();
    assert_eq!(report.duplicates_dropped.len(), 1);
    let dropped = &report.duplicates_dropped[0];
    assert_eq!((dropped.height, dropped.kept_height), (719601, 719599));
    assert_eq!(dropped.timestamp, "2022-01-20T09:26:01Z");
    // 719600 is earlier than 719599 which precedes it
    assert_eq!(report.reordered.len(), 1);
    assert_eq!(report.reordered[0].height, 719600);
    let heights: Vec<u64> = cleaned.iter().map(|b| b.height).collect();
    assert_eq!(heights, vec![719598, 719600, 719599, 719602]);
    assert_eq!(cleaned[2].timestamp.timestamp(), 1_642_670_761);
}

#[test]
fn clean_input_is_untouched() {
    let blocks: Vec<BlockRecord> = (0..20)
        .map(|k| BlockRecord {
            height: k,
            timestamp: t0() + Duration::seconds(600 * k as i64),
            tx_count: 100,
        })
        .collect();
    let (cleaned, report) = clean_blocks(&blocks).unwrap();
    assert_eq!(cleaned, blocks);
    assert!(report.is_empty());
}

#[test]
fn block_csv_reports_every_bad_line() {
    let csv = "height,timestamp,tx_count\n1,2022-01-01T00:00:00Z,5\nx,2022-01-01T00:10:00Z,5\n3,noon,5\n1,2022-01-01T00:20:00Z,5\n";
    match read_blocks_csv(csv.as_bytes()) {
        Err(Error::Parse(rows)) => {
            let lines: Vec<usize> = rows.iter().map(|r| r.line).collect();
            assert_eq!(lines, vec![3, 4, 5]);
            assert!(rows[2].message.contains("duplicate height"));
        }
        other => panic!("expected parse errors, got {other:?}"),
    }
    assert!(matches!(read_blocks_csv("a,b\n".as_bytes()), Err(Error::Parse(_))));
}

#[test]
fn block_csv_round_trip() {
    let blocks = vec![
        BlockRecord {
            height: 7,
            timestamp: t0(),
            tx_count: 12,
        },
        BlockRecord {
            height: 8,
            timestamp: t0() + Duration::seconds(61),
            tx_count: 0,
        },
    ];
    let mut buf = Vec::new();
    write_blocks_csv(&mut buf, &blocks).unwrap();
    assert_eq!(read_blocks_csv(buf.as_slice()).unwrap(), blocks);
}

#[test]
fn price_returns_and_gaps() {
    let csv = "timestamp,vwap\n2022-01-01T00:00:00Z,100\n2022-01-01T00:05:00Z,271.8281828459045\n2022-01-01T00:15:00Z,271.8281828459045\n";
    let bars = read_prices_csv(csv.as_bytes()).unwrap();
    let r = log_returns(&bars).unwrap();
    assert_eq!(r.returns.len(), 2);
    assert!((r.returns[0].value - 1.0).abs() < 1e-12);
    assert_eq!(r.returns[1].value, 0.0);
    assert!(r.returns[1].gap && !r.returns[0].gap);
    assert_eq!(r.gaps.len(), 1);
    assert_eq!(r.gaps[0].missing_bars, 1);

    let off_grid = "timestamp,vwap\n2022-01-01T00:00:00Z,100\n2022-01-01T00:04:00Z,101\n2022-01-01T00:10:00Z,-3\n";
    match read_prices_csv(off_grid.as_bytes()) {
        Err(Error::Parse(rows)) => assert_eq!(rows.iter().map(|r| r.line).collect::<Vec<_>>(), vec![3, 4]),
        other => panic!("expected parse errors, got {other:?}"),
    }
}

#[test]
fn constant_prices_give_zero_returns() {
    let bars: Vec<PriceBar> = (0..50)
        .map(|k| PriceBar {
            timestamp: t0() + Duration::seconds(BAR_SECONDS * k),
            vwap: 41_000.0,
        })
        .collect();
    let r = log_returns(&bars).unwrap();
    assert!(r.returns.iter().all(|x| x.value == 0.0));
    let jumps = extract_jumps(&r.returns, &JumpConfig::default()).unwrap();
    assert!(jumps.up.is_empty() && jumps.down.is_empty());
}

#[test]
fn lone_spike_is_the_only_jump() {
    // two-point noise sits exactly on its own quantiles, so only the spike crosses
    let eps = 1e-4;
    let mut values: Vec<f64> = (0..300).map(|k| if k % 2 == 0 { eps } else { -eps }).collect();
    values[150] = 10.0 * eps;
    let returns = bar_series(&values);
    let jumps = extract_jumps(&returns, &JumpConfig::default()).unwrap();
    assert_eq!(jumps.up, vec![returns[150].timestamp]);
    assert!(jumps.down.is_empty());
}

#[test]
fn spike_in_gaussian_noise_is_flagged() {
    let mut r = rng(77);
    let normal = Normal::new(0.0, 1e-3).unwrap();
    let mut values: Vec<f64> = (0..600).map(|_| normal.sample(&mut r)).collect();
    values[400] = 1e-2;
    let returns = bar_series(&values);
    let jumps = extract_jumps(&returns, &JumpConfig::default()).unwrap();
    assert!(jumps.up.contains(&returns[400].timestamp));
    assert!(!jumps.down.contains(&returns[400].timestamp));
}

#[test]
fn trivariate_merge_orders_ties_by_mark() {
    let start = t0();
    let end = start + Duration::hours(2);
    let at = start + Duration::minutes(30);
    let blocks = [BlockRecord {
        height: 1,
        timestamp: at,
        tx_count: 1,
    }];
    let tri = build_trivariate(&blocks, &[at], &[start + Duration::minutes(45)], start, end).unwrap();
    assert_eq!(
        tri.sequence.events(),
        &[
            Event::new(0.5, MARK_BLOCK),
            Event::new(0.5, MARK_UP),
            Event::new(0.75, MARK_DOWN)
        ]
    );
    assert_eq!(tri.sequence.horizon(), 2.0);
    let mut buf = Vec::new();
    write_events_csv(&mut buf, &tri.sequence).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("time_hours,mark\n"));
    let back = read_events_csv(buf.as_slice(), Some(2.0), Some(3)).unwrap();
    assert_eq!(back, tri.sequence);
}

#[test]
fn jumps_csv_round_trip_in_time_order() {
    let jumps = Jumps {
        up: vec![t0() + Duration::minutes(10), t0() + Duration::minutes(30)],
        down: vec![t0() + Duration::minutes(20)],
        skipped: 0,
    };
    let mut buf = Vec::new();
    write_jumps_csv(&mut buf, &jumps).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(
        text,
        "timestamp,direction\n2022-01-01T00:10:00Z,up\n2022-01-01T00:20:00Z,down\n2022-01-01T00:30:00Z,up\n"
    );
    assert_eq!(read_jumps_csv(buf.as_slice()).unwrap(), jumps);
    match read_jumps_csv("timestamp,direction\n2022-01-01T00:10:00Z,sideways\nnever,up\n".as_bytes()) {
        Err(Error::Parse(rows)) => assert_eq!(rows.iter().map(|r| r.line).collect::<Vec<_>>(), vec![2, 3]),
        other => panic!("expected parse errors, got {other:?}"),
    }
}

fn arb_blocks() -> impl Strategy<Value = Vec<BlockRecord>> {
    prop::collection::vec((0i64..5000, 0u64..50), 1..120).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(k, (secs, tx))| BlockRecord {
                height: 700_000 + k as u64,
                // a coarse grid makes duplicate timestamps common
                timestamp: t0() + Duration::seconds(secs - secs % 7),
                tx_count: tx,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn cleaning_is_idempotent_and_conservative(blocks in arb_blocks()) {
        let (cleaned, report) = clean_blocks(&blocks).unwrap();
        prop_assert!(cleaned.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        prop_assert_eq!(cleaned.len() + report.duplicates_dropped.len(), blocks.len());
        for d in &report.duplicates_dropped {
            prop_assert!(d.kept_tx_count >= d.tx_count);
        }
        let (again, second) = clean_blocks(&cleaned).unwrap();
        prop_assert_eq!(&again, &cleaned);
        prop_assert!(second.is_empty());
    }

    #[test]
    fn log_returns_ignore_price_scale(prices in prop::collection::vec(1.0f64..1e5, 2..60), scale in 1e-3f64..1e3) {
        let bars = |s: f64| -> Vec<PriceBar> {
            prices
                .iter()
                .enumerate()
                .map(|(k, p)| PriceBar { timestamp: t0() + Duration::seconds(BAR_SECONDS * k as i64), vwap: p * s })
                .collect()
        };
        let a = log_returns(&bars(1.0)).unwrap();
        let b = log_returns(&bars(scale)).unwrap();
        for (x, y) in a.returns.iter().zip(&b.returns) {
            prop_assert!((x.value - y.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn extreme_quantiles_flag_only_new_extremes(values in prop::collection::vec(-1.0f64..1.0, 13..200)) {
        let config = JumpConfig { q_low: 0.0, q_high: 1.0, ..Default::default() };
        let returns = bar_series(&values);
        let jumps = extract_jumps(&returns, &config).unwrap();
        // thresholds are the history extremes, so a value inside its history's range is never flagged
        for k in 12..values.len() {
            let hist = &values[k.saturating_sub(36)..k];
            let hi = hist.iter().cloned().fold(f64::MIN, f64::max);
            let lo = hist.iter().cloned().fold(f64::MAX, f64::min);
            let t = returns[k].timestamp;
            prop_assert_eq!(jumps.up.contains(&t), values[k] > hi);
            prop_assert_eq!(jumps.down.contains(&t), values[k] < lo);
        }
    }

    #[test]
    fn timestamps_round_trip(secs in 0i64..4_000_000_000) {
        let ts = DateTime::from_timestamp(secs, 0).unwrap();
        prop_assert_eq!(parse_timestamp(&format_timestamp(&ts)).unwrap(), ts);
        prop_assert_eq!(parse_timestamp(&secs.to_string()).unwrap(), ts);
    }
}
