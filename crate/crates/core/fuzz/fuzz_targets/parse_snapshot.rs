#![no_main]

use gbswitch_core::game::{parse_snapshot, GameState};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(snap) = parse_snapshot(s) {
        // replay may reject the log, but must not panic
        let _ = GameState::from_snapshot("fuzz", &snap);
    }
});
