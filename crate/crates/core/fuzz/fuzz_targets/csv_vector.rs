#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(v) = conelab::io::parse_vector_csv(text) else { return };
    assert!(!v.is_empty() && v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    let xs: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
    let again = conelab::io::parse_vector_csv(&conelab::io::write_vector_csv(&xs, &v)).expect("written vector reparses");
    assert_eq!(v, again);
});
