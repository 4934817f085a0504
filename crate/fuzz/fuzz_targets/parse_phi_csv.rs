#![no_main]

use bertrand::cli::parse_phi_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(rows) = parse_phi_csv(data) {
        assert!(rows.len() >= 2);
        // Radii strictly increasing and everything positive.
        assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(rows.iter().all(|(r, p)| *r > 0.0 && *p > 0.0));
    }
});
