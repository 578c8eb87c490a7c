#![no_main]

use libfuzzer_sys::fuzz_target;
use lotforge::instance::{validate, CmilsInstance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = CmilsInstance::from_json_str(text) else { return };
    let _ = validate(&inst);
    let again = CmilsInstance::from_json_str(&inst.to_json_string()).expect("own output parses");
    assert_eq!(again, inst);
});
