#![no_main]

use gbswitch_core::format::{parse_tensor_bytes, tensor_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = parse_tensor_bytes(data) {
        let json = tensor_to_json(&t);
        let back = parse_tensor_bytes(json.as_bytes()).expect("written documents parse");
        assert_eq!(back, t);
    }
});
