#![no_main]
use libfuzzer_sys::fuzz_target;

use fbs_core::hamiltonians::SystemConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SystemConfig::from_toml_str(s) {
        let _ = cfg.system_spec();
        let _ = cfg.drive();
        let _ = cfg.power_budget();
    }
});
