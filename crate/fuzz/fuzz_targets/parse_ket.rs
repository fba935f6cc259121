#![no_main]
use libfuzzer_sys::fuzz_target;

use fbs_core::fockspace::text::{parse_ket, write_ket};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(ket) = parse_ket(s) {
        // Anything accepted must survive a write/read cycle unchanged.
        let again = parse_ket(&write_ket(&ket)).expect("re-parse of written ket");
        assert_eq!(ket, again);
    }
});
