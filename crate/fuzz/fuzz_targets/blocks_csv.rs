#![no_main]

use chainhawkes::ingest::{clean_blocks, read_blocks_csv, write_blocks_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(blocks) = read_blocks_csv(data) {
        if blocks.is_empty() {
            return;
        }
        let (cleaned, _) = clean_blocks(&blocks).expect("parsed blocks clean");
        let mut out = Vec::new();
        write_blocks_csv(&mut out, &cleaned).unwrap();
        assert_eq!(read_blocks_csv(out.as_slice()).unwrap(), cleaned);
    }
});
