#![no_main]

use libfuzzer_sys::fuzz_target;

use devsurf_core::curve_model::{build, parse_curve_spec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_curve_spec(text) else {
        return;
    };
    assert_eq!(parse_curve_spec(&spec.to_json()).map(|s| s.samples), Ok(spec.samples));
    // keep each run short; large grids only cost time
    if spec.samples <= 4096 {
        let _ = build(&spec);
    }
});
