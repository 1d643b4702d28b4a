#![no_main]

use aclr::io::codebook_from_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let _ = codebook_from_json(s, 4096);
});
