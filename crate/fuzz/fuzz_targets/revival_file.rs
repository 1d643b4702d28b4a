#![no_main]

use aclr::io::RevivalFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let _ = RevivalFile::from_json(s, 4096);
});
