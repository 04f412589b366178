#![no_main]

use dde_bounds::input::Range;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(range) = Range::parse(data) {
        let points = range.points();
        assert!(points.len() >= 2);
        assert!(points.windows(2).all(|w| w[0] < w[1]));
    }
});
