#![no_main]

use campus_harness::ops::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ops) = parse(text) {
        for op in &ops {
            assert!(op.path.starts_with('/') && !op.path.starts_with("/api/"));
            assert_eq!(op.path.contains("{id}"), op.resolve.is_some());
        }
    }
});
