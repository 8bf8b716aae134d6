#![no_main]

use gbswitch_core::game::parse_move;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_move(s);
    }
});
