//! Benchmark-only crate; see `benches/pipeline.rs`.  Shared fixtures
//! live here so the bench target stays focused on measurement.

use padicl_core::dirichlet::{character, DirichletCharacter};
use padicl_core::UnramifiedWitnessRing;

/// The reference even instance used throughout the benches: p = 7 and
/// the even quadratic character of conductor 8, in twelve digits.
pub fn reference_ring() -> UnramifiedWitnessRing {
    UnramifiedWitnessRing::build(7, 12, &[8]).expect("reference ring")
}

/// The even quadratic character of conductor 8.
pub fn reference_character() -> DirichletCharacter {
    character(8, 1).expect("reference character")
}
