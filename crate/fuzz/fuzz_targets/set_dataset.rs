#![no_main]

use gdl_core::data::read_set_dataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_set_dataset(data);
});
