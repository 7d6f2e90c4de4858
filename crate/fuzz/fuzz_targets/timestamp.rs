#![no_main]

use chainhawkes::ingest::{format_timestamp, parse_timestamp};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(ts) = parse_timestamp(s) {
            assert_eq!(parse_timestamp(&format_timestamp(&ts)), Ok(ts));
        }
    }
});
