#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(e) = devsurf_core::expr::parse(text) else {
        return;
    };
    // printing must give an expression that parses back to the same tree
    let printed = e.to_string();
    let again = devsurf_core::expr::parse(&printed).expect("printed expression parses");
    assert_eq!(again.to_string(), printed);
    let _ = e.eval_with(&|_| Some(0.5));
    if let Some(v) = e.variables().first() {
        let _ = e.eval_derivative(v, 0.5);
    }
});
