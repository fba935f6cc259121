#![no_main]
use libfuzzer_sys::fuzz_target;

use fbs_core::analysis::Trace;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = Trace::from_csv_str(s) {
        let text = trace.to_csv_string().expect("parsed trace has series");
        let again = Trace::from_csv_str(&text).expect("re-parse of written trace");
        assert_eq!(again.times.len(), trace.times.len());
    }
});
