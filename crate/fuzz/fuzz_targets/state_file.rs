#![no_main]

use aclr::io::StateFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(f) = StateFile::from_json(s, 4096) {
        let again = StateFile::from_json(&f.to_json().unwrap(), 4096).unwrap();
        assert_eq!(again.state.amplitudes(), f.state.amplitudes());
    }
});
