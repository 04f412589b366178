#![no_main]

use dde_bounds::numfmt::to_json_string;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    let first = to_json_string(&value);
    let reparsed: serde_json::Value = serde_json::from_str(&first).expect("writer emits valid JSON");
    assert_eq!(first, to_json_string(&reparsed));
});
