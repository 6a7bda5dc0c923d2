#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = conelab::io::parse_coo(text) else { return };
    assert!(m.entries.iter().all(|&(r, c, _)| r < m.rows && c < m.cols));
    let again = conelab::io::parse_coo(&conelab::io::write_coo(&m)).expect("written matrix reparses");
    assert_eq!(m, again);
    let _ = m.to_tridiagonal();
});
