//! Replays the fuzz corpus seeds through the invariants the fuzz targets
//! assert, so they run on stable too.

use std::fs;
use std::path::Path;

use conelab::io::{index_set_json, parse_coo, parse_index_set, parse_vector_csv, write_coo, write_vector_csv};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("config_json") {
        if let Ok(cfg) = conelab::config::parse_config(&text) {
            cfg.model().unwrap_or_else(|e| panic!("{name}: {e}"));
            let _ = cfg.parameters();
            ok += 1;
        }
    }
    assert!(ok >= 3);
}

#[test]
fn index_set_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("index_set_json") {
        if let Ok(set) = parse_index_set(&text) {
            assert_eq!(parse_index_set(&index_set_json(&set)).unwrap(), set, "{name}");
            let _ = set.hat();
            ok += 1;
        }
    }
    assert_eq!(ok, 2);
}

#[test]
fn csv_vector_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("csv_vector") {
        if let Ok(v) = parse_vector_csv(&text) {
            let xs: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
            assert_eq!(parse_vector_csv(&write_vector_csv(&xs, &v)).unwrap(), v, "{name}");
            ok += 1;
        }
    }
    assert_eq!(ok, 2);
}

#[test]
fn coo_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("coo_matrix") {
        if let Ok(m) = parse_coo(&text) {
            assert_eq!(parse_coo(&write_coo(&m)).unwrap(), m, "{name}");
            let _ = m.to_tridiagonal();
            ok += 1;
        }
    }
    assert_eq!(ok, 2);
}
