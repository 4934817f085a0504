#![no_main]

use bertrand::cli::parse_csv_table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok((_, header, rows)) = parse_csv_table(data) {
        // Every row matches the header width.
        assert!(rows.iter().all(|r| r.len() == header.len()));
    }
});
