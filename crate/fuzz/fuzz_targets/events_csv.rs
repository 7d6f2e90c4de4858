#![no_main]

use chainhawkes::ingest::{read_events_csv, write_events_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(seq) = read_events_csv(data, None, None) {
        let mut out = Vec::new();
        write_events_csv(&mut out, &seq).unwrap();
        let back = read_events_csv(out.as_slice(), Some(seq.horizon()), Some(seq.dim())).unwrap();
        assert_eq!(back.len(), seq.len());
    }
});
