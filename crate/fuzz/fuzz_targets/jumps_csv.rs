#![no_main]

use chainhawkes::ingest::{read_jumps_csv, write_jumps_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(jumps) = read_jumps_csv(data) {
        let mut out = Vec::new();
        write_jumps_csv(&mut out, &jumps).unwrap();
        let back = read_jumps_csv(out.as_slice()).unwrap();
        assert_eq!(back.up.len() + back.down.len(), jumps.up.len() + jumps.down.len());
    }
});
