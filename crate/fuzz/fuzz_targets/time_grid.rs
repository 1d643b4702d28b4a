#![no_main]

use aclr::io::TimeGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(grid) = s.parse::<TimeGrid>() {
        assert_eq!(grid.points().len(), grid.len());
    }
});
