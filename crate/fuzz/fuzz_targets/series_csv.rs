#![no_main]

use aclr::io::{parse_series_csv, series_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(series) = parse_series_csv(s, 1) {
        let _ = parse_series_csv(&series_csv(&series), 1).unwrap();
    }
});
