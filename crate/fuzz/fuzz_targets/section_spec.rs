#![no_main]

use libfuzzer_sys::fuzz_target;

use devsurf_core::shadow_cone::{build_section, parse_section_spec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_section_spec(text) else {
        return;
    };
    if spec.samples <= 4096 {
        let _ = build_section(&spec);
    }
});
