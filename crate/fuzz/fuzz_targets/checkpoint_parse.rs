#![no_main]

use gdl_core::checkpoint::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 20 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ckpt) = Checkpoint::parse(text) {
        let json = ckpt.to_json().expect("serializes");
        assert_eq!(Checkpoint::parse(&json).expect("round trip"), ckpt);
    }
});
