#![no_main]

use campus_core::{EndpointGroup, PermissionMatrix, Role};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = PermissionMatrix::parse(text) {
        for role in Role::ALL {
            for group in EndpointGroup::ALL {
                assert_eq!(m.allows(role, group), m.check(role, group).is_ok());
            }
        }
    }
});
