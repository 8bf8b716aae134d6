#![no_main]

use gbswitch_core::Shape;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(shape) = s.parse::<Shape>() {
        assert_eq!(shape.to_string().parse::<Shape>().unwrap(), shape);
    }
});
