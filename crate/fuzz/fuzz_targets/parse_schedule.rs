#![no_main]
use libfuzzer_sys::fuzz_target;

use fbs_core::protocols::PulseSchedule;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(schedule) = PulseSchedule::from_toml_str(s) {
        let text = schedule.to_toml_string().expect("valid schedules serialize");
        let again = PulseSchedule::from_toml_str(&text).expect("serialized schedule re-parses");
        assert_eq!(again.segments.len(), schedule.segments.len());
    }
});
