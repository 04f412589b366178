#![no_main]

use dde_bounds::input::parse_model;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(model) = parse_model(text) {
            let _ = model.eval_g(1.0);
            let _ = dde_bounds::analysis::critical_point(&model);
        }
    }
});
