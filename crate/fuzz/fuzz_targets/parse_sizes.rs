#![no_main]

use gemmlab::parse_sizes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sizes) = parse_sizes(text) {
        assert!(!sizes.is_empty());
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
        assert!(sizes[0] >= 1);
    }
});
