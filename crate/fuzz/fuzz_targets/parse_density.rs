#![no_main]
use libfuzzer_sys::fuzz_target;

use fbs_core::fockspace::text::{parse_density, write_density};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rho) = parse_density(s) {
        let again = parse_density(&write_density(&rho)).expect("re-parse of written density");
        assert_eq!(rho, again);
    }
});
