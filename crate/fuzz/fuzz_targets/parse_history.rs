#![no_main]

use dde_bounds::input::parse_history;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(history) = parse_history(data) {
        let _ = history.label();
    }
});
