#![no_main]

use chainhawkes::hawkes::{kernel_norms, HawkesModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = serde_json::from_slice::<HawkesModel>(data) {
        let _ = kernel_norms(&model);
        let text = serde_json::to_string(&model).unwrap();
        let back: HawkesModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back.dim(), model.dim());
    }
});
