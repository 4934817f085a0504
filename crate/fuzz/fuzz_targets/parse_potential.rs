#![no_main]

use bertrand::potentials::PotentialSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Must never panic; accepted specs must satisfy the family invariants.
    if let Ok(spec) = data.parse::<PotentialSpec>() {
        match &spec {
            PotentialSpec::PowerLawPositive { k, nu, .. } => {
                assert!(*k > 0.0 && *nu > 0.0);
            }
            PotentialSpec::PowerLawAttractive { k, nu, .. } => {
                assert!(*k > 0.0 && *nu > 0.0 && *nu < 2.0);
            }
            PotentialSpec::Logarithmic { k, .. } => assert!(*k > 0.0),
            PotentialSpec::Tabulated { .. } => unreachable!("grammar has no tabulated form"),
        }
        let _ = spec.eval(1.0, 0);
    }
});
