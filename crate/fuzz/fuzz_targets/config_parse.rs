#![no_main]

use gdl_core::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = Config::parse(text) {
        assert_eq!(Config::parse(&cfg.to_text()).expect("round trip"), cfg);
    }
});
