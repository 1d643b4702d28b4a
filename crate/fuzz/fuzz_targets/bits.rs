#![no_main]

use aclr::chrono::{format_bits, parse_bits};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(bits) = parse_bits(s) {
        assert_eq!(parse_bits(&format_bits(&bits)).unwrap(), bits);
    }
});
