//! Exact p-adic arithmetic for special values of p-adic L-functions.
//!
//! The crate computes, in truncated unramified extensions `(Z/p^N)[x]/(m(x))`:
//!
//! * Kubota–Leopoldt p-adic L-functions of Dirichlet characters as power
//!   series in `T = (1 + p)^s - 1`, via Stickelberger elements over the
//!   cyclotomic tower ([`iwasawa`]);
//! * p-adic logarithms of cyclotomic units and the valuation/derivative
//!   invariants attached to them ([`cyclo_units`]);
//! * images of norm-coherent unit towers under the Coleman map and the
//!   associated Gamma-transform ([`coleman`]);
//! * L-invariants of imaginary quadratic fields at split primes, with the
//!   Ferrero–Greenberg derivative formula ([`quadratic`]).
//!
//! Everything is exact modulo an explicit power of p: each value carries its
//! guaranteed precision, arithmetic propagates worst-case precision, and the
//! verification suites ([`verify`]) compare independently computed sides of
//! the classical identities digit by digit.

pub mod catalog;
pub mod coleman;
pub mod cyclo_field;
pub mod cyclo_units;
pub mod dirichlet;
pub mod error;
pub mod iwasawa;
pub mod quadratic;
pub mod report;
pub mod ring;
pub mod series;
pub mod stickelberger;
pub mod verify;

pub use error::{Error, Result};
pub use ring::{ElementDescriptor, PadicElement, PadicScaled, RingDescriptor, UnramifiedWitnessRing};
pub use series::TruncatedSeries;
