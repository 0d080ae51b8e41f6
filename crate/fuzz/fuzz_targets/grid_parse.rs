#![no_main]
use coherent_qkd_cli::grid::{parse_grid, MAX_POINTS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = std::str::from_utf8(data) {
        if let Ok(points) = parse_grid(spec) {
            assert!(!points.is_empty());
            assert!(points.len() <= MAX_POINTS);
            assert!(points.iter().all(|x| x.is_finite()));
        }
    }
});
