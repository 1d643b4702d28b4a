#![no_main]

use aclr::ChainSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<ChainSpec>(data) {
        let _ = spec.with_max_dim(4096).dim();
    }
});
