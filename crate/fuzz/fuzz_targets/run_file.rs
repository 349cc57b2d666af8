#![no_main]

use campus_harness::report::{read_run, render_table, rows, runs, write_run};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(samples) = read_run(data) {
        let mut again = Vec::new();
        write_run(&mut again, &samples).unwrap();
        let reread = read_run(&again[..]).unwrap();
        assert_eq!(reread, samples);
        assert_eq!(render_table(&rows(&runs(&reread))), render_table(&rows(&runs(&samples))));
    }
});
