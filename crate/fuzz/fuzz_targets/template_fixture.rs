#![no_main]

use campus_core::scheduling::parse_template_fixture;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(templates) = parse_template_fixture(text) {
        for t in templates {
            assert!(t.window_start < t.window_end);
            assert!(!t.name.trim().is_empty());
        }
    }
});
