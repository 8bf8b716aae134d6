#![no_main]

use gbswitch_core::format::parse_assignment;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_assignment(s);
    }
});
