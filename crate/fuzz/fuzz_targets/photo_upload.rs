#![no_main]

use campus_core::photo::{validate_upload, webp_dimensions, PhotoUpload, THUMB_MAX_DIM};
use libfuzzer_sys::fuzz_target;

// Layout: 2-byte big-endian split point, 8-byte original size, then the main
// photo and thumbnail bytes.
fuzz_target!(|data: &[u8]| {
    if data.len() < 10 {
        return;
    }
    let split = u16::from_be_bytes([data[0], data[1]]) as usize;
    let original_size = u64::from_be_bytes(data[2..10].try_into().unwrap());
    let rest = &data[10..];
    let split = split.min(rest.len());
    let upload = PhotoUpload { main: rest[..split].to_vec(), thumb: rest[split..].to_vec(), original_size };
    if let Ok(webp) = validate_upload(&upload, 2_000_000) {
        let (w, h) = webp_dimensions(&webp).expect("validated thumbnails re-encode to webp");
        assert!(w <= THUMB_MAX_DIM && h <= THUMB_MAX_DIM);
    }
});
