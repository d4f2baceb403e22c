//! Fixtures shared by the benchmark targets.

use subkit_core::{SubstitutionSpec, TruncationScheme};

pub fn bundled(name: &str) -> SubstitutionSpec {
    subkit_core::examples::load(name)
        .expect("bundled name")
        .expect("bundled specs parse")
}

pub fn scheme(spec: &SubstitutionSpec, cutoff: u64) -> TruncationScheme {
    TruncationScheme::new(&spec.alphabet, cutoff).expect("scheme builds")
}
