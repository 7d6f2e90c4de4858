#![no_main]

use chainhawkes::ingest::{extract_jumps, log_returns, read_prices_csv, JumpConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(bars) = read_prices_csv(data) {
        if let Ok(r) = log_returns(&bars) {
            let _ = extract_jumps(&r.returns, &JumpConfig::default());
        }
    }
});
