#![no_main]

use libfuzzer_sys::fuzz_target;

use devsurf_core::geom_io::{export_csv, parse_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = parse_csv(text) else {
        return;
    };
    // whatever parses must survive a second trip unchanged
    if let Ok(out) = export_csv(&table) {
        let back = parse_csv(&out).expect("exported csv parses");
        let bits = |t: &devsurf_core::geom_io::Table| {
            t.columns
                .iter()
                .map(|(n, v)| (n.clone(), v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&back), bits(&table));
    }
});
