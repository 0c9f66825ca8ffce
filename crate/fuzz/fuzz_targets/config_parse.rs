#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = noise_radar::runner::check_config(text) {
            // A config that validates must serialize and re-validate.
            let again = serde_json::to_string(&cfg).unwrap();
            noise_radar::runner::check_config(&again).unwrap();
        }
    }
});
