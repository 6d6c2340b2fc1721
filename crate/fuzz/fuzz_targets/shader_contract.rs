#![no_main]

use gemmlab_gpu::check_contract;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(wgsl) = std::str::from_utf8(data) {
        let _ = check_contract("fuzz.wgsl", wgsl);
    }
});
