#![no_main]

use std::collections::BTreeSet;

use campus_core::scheduling::parse_area_registry;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(areas) = parse_area_registry(text) {
        let codes: BTreeSet<_> = areas.iter().map(|a| a.code.as_str()).collect();
        assert_eq!(codes.len(), areas.len(), "duplicate area codes accepted");
        assert!(areas.iter().all(|a| !a.code.trim().is_empty()));
    }
});
