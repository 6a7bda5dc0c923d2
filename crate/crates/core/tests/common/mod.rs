#![allow(dead_code)]

use conelab::indicial::IndexSet;
use num_complex::Complex64;
use proptest::prelude::*;

/// Exponents on a coarse lattice so that coincidences (and hence new log
/// orders under ∪̄) are frequent.
pub fn exponent() -> impl Strategy<Value = Complex64> {
    (-4i32..=8, -2i32..=2).prop_map(|(a, b)| Complex64::new(a as f64 * 0.5, b as f64))
}

pub fn index_set() -> impl Strategy<Value = IndexSet> {
    (
        prop::collection::vec((exponent(), 0u32..4), 0..10),
        prop::sample::select(vec![1.0, 2.0, 3.5, 5.0]),
    )
        .prop_map(|(pairs, cutoff)| IndexSet::from_pairs(pairs, cutoff))
}

/// max over the set of the log order attached to any exponent.
pub fn max_log(s: &IndexSet) -> u32 {
    s.max_log_order().unwrap_or(0)
}

pub fn ext_union_commutes(e: &IndexSet, f: &IndexSet) -> bool {
    e.extended_union(f) == f.extended_union(e)
}

pub fn ext_union_monotone(e: &IndexSet, f: &IndexSet) -> bool {
    let u = e.extended_union(f);
    e.is_subset_of(&u) && f.is_subset_of(&u)
}

/// Every log order in E ∪̄ F is ≤ j_max(E) + k_max(F) + 1.
pub fn ext_union_log_bound(e: &IndexSet, f: &IndexSet) -> bool {
    let bound = max_log(e) + max_log(f) + 1;
    e.extended_union(f).exponents().iter().all(|&(_, k)| k <= bound)
}

pub fn saturation_idempotent(e: &IndexSet) -> bool {
    let once = e.saturated();
    once.saturated() == once
}
