#![no_main]

use gemmlab::report::{emit_csv, parse_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = parse_csv(text) {
        // Anything that parses must re-emit and parse back to the same table.
        let again = emit_csv(&table).expect("emit parsed table");
        assert_eq!(parse_csv(&again).expect("reparse"), table);
    }
});
