#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(set) = conelab::io::parse_index_set(text) else { return };
    let again = conelab::io::parse_index_set(&conelab::io::index_set_json(&set)).expect("written index set reparses");
    assert_eq!(set, again);
    let _ = set.hat();
    let _ = set.extended_union(&set);
});
