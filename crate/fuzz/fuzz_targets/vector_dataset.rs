#![no_main]

use gdl_core::data::read_vector_dataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_vector_dataset(data);
});
