#![no_main]

use aclr::io::{key_from_json, key_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(key) = key_from_json(s, 4096) {
        let text = key_to_json(&key).unwrap();
        assert_eq!(key_from_json(&text, 4096).unwrap(), key);
    }
});
