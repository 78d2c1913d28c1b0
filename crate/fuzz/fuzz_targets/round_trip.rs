#![no_main]

use libfuzzer_sys::fuzz_target;
use nonlocal_spectra::{echo, parse_config_str};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(parsed) = parse_config_str(text) else {
        return;
    };
    let echoed = echo(&parsed).expect("a valid config serializes");
    let again = parse_config_str(&echoed).expect("an echoed config parses");
    assert_eq!(parsed, again);
});
