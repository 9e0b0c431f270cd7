//! Replays the checked-in fuzz corpus through the same entry points and
//! assertions as the fuzz targets, so the seeds stay meaningful on stable.

use std::fs;
use std::path::PathBuf;

use devsurf_core::curve_model::{build, parse_curve_spec};
use devsurf_core::expr;
use devsurf_core::geom_io::{export_csv, parse_csv};
use devsurf_core::shadow_cone::{build_section, parse_section_spec};
use devsurf_core::verify::parse_implicit_spec;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn expect_valid(name: &str) -> bool {
    !(name.starts_with("invalid")
        || name.starts_with("unbalanced")
        || name.starts_with("syntax")
        || name.starts_with("ragged"))
}

#[test]
fn expr_seeds() {
    for (name, text) in seeds("expr_parse") {
        match expr::parse(&text) {
            Ok(e) => {
                assert!(expect_valid(&name), "{name} should not parse");
                let printed = e.to_string();
                assert_eq!(
                    expr::parse(&printed).unwrap().to_string(),
                    printed,
                    "{name}"
                );
            }
            Err(_) => assert!(!expect_valid(&name), "{name} should parse"),
        }
    }
}

#[test]
fn curve_spec_seeds() {
    for (name, text) in seeds("curve_spec") {
        match parse_curve_spec(&text) {
            Ok(spec) => {
                assert!(expect_valid(&name), "{name}");
                assert_eq!(
                    parse_curve_spec(&spec.to_json()).as_ref(),
                    Ok(&spec),
                    "{name}"
                );
                build(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
            Err(e) => assert!(!expect_valid(&name), "{name}: {e}"),
        }
    }
}

#[test]
fn section_spec_seeds() {
    for (name, text) in seeds("section_spec") {
        match parse_section_spec(&text) {
            Ok(spec) => {
                assert!(expect_valid(&name), "{name}");
                build_section(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
            Err(e) => assert!(!expect_valid(&name), "{name}: {e}"),
        }
    }
}

#[test]
fn csv_seeds() {
    for (name, text) in seeds("csv_parse") {
        match parse_csv(&text) {
            Ok(table) => {
                assert!(expect_valid(&name), "{name}");
                let back = parse_csv(&export_csv(&table).unwrap()).unwrap();
                assert_eq!(back.columns.len(), table.columns.len());
                for (a, b) in table.columns.iter().zip(&back.columns) {
                    assert_eq!(a.0, b.0);
                    assert!(
                        a.1.iter()
                            .zip(&b.1)
                            .all(|(x, y)| x.to_bits() == y.to_bits()),
                        "{name}"
                    );
                }
            }
            Err(e) => assert!(!expect_valid(&name), "{name}: {e}"),
        }
    }
}

#[test]
fn implicit_spec_seeds() {
    for (name, text) in seeds("implicit_spec") {
        match parse_implicit_spec(&text) {
            Ok(spec) => {
                assert!(expect_valid(&name), "{name}");
                let p = spec.point(spec.a_range.0, spec.b_range.0).unwrap();
                assert!(spec.value(&p).abs() < 1e-12, "{name}");
            }
            Err(e) => assert!(!expect_valid(&name), "{name}: {e}"),
        }
    }
}
