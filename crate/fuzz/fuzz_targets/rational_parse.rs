#![no_main]

use libfuzzer_sys::fuzz_target;
use lotforge::num::{format_rational, parse_rational, to_decimal};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 256 {
        return;
    }
    let Ok(q) = parse_rational(text) else { return };
    assert_eq!(parse_rational(&format_rational(&q)).expect("canonical form parses"), q);
    let _ = to_decimal(&q, 12);
});
