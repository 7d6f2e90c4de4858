#![no_main]

use chainhawkes_cli::config::{fit_config, jump_config, parse_config, FitFlags, JumpFlags};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(file) = parse_config(s) {
            let _ = jump_config(&JumpFlags::default(), &file);
            let _ = fit_config(&FitFlags::default(), &file);
        }
    }
});
