#![no_main]

use bertrand::cli::GridSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(grid) = GridSpec::parse(data) {
        if let Ok(values) = grid.explicit_values() {
            // Expanded grids are nonempty and finite.
            assert!(!values.is_empty());
            assert!(values.iter().all(|v| v.is_finite()));
        }
    }
});
