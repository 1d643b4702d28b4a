#![no_main]

use aclr::io::{parse_grid_or_list, parse_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    let _ = parse_list(s);
    let _ = parse_grid_or_list(s);
});
