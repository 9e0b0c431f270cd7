#![no_main]

use libfuzzer_sys::fuzz_target;

use devsurf_core::verify::parse_implicit_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_implicit_spec(text) else {
        return;
    };
    if let Ok(p) = spec.point(spec.a_range.0, spec.b_range.0) {
        let _ = spec.value(&p);
    }
});
