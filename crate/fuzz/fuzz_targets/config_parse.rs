#![no_main]
use coherent_qkd_cli::config::{parse_config, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = parse_config(text) {
        // Validation may reject values but must not panic.
        let _ = ExperimentConfig::from_map(&map);
    }
});
