#![no_main]

use gemmlab::report::ResultsFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(results) = ResultsFile::from_json(text) {
        let _ = results.to_json();
    }
});
