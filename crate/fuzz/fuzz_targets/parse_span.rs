#![no_main]

use bertrand::cli::parse_span;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(span) = parse_span(data) {
        assert!(span > 0.0 && span.is_finite());
    }
});
