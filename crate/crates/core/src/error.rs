//! Typed errors shared across the crate.
//!
//! Every fallible operation reports a structured reason: precondition
//! violations (parity, primitivity, coprimality), capacity limits of the
//! fixed-width residue engine, and precision exhaustion are all distinct
//! variants so the CLI can map them to exit codes.

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("p = {0} must be an odd prime")]
    NotOddPrime(u64),
    #[error("certified order m = {m} must be a positive integer coprime to p = {p}")]
    BadRootOrder { m: u64, p: u64 },
    #[error("p^N with p = {p}, N = {n} exceeds the engine word size (p^N must stay below 2^63)")]
    PrecisionCap { p: u64, n: u32 },
    #[error("residue degree d = {d} for p = {p} exceeds the engine range (p^d must stay below 2^62)")]
    DegreeCap { p: u64, d: u64 },
    #[error("m = {m} does not divide p^d - 1 = {q1}: the ring contains no primitive m-th root of unity")]
    RootOrderNotContained { m: u64, q1: u64 },
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("element is not a unit")]
    NonUnit,
    #[error("element has no remaining precision")]
    NoPrecision,
    #[error("logarithm of zero: element vanishes to working precision")]
    LogOfZero,
    #[error("inexact division: element is not divisible by p^{0} at its stated precision")]
    InexactRescale(u32),
    #[error("denominator divisible by p cannot be embedded without a scale shift")]
    DenominatorNotUnit,
    #[error("modulus f = {0} must be at least 1")]
    BadModulus(u64),
    #[error("character index {idx} out of range for modulus {f} (unit group has order {phi})")]
    CharacterIndex { f: u64, idx: u64, phi: u64 },
    #[error("character is not primitive (conductor {cond} < modulus {f})")]
    NotPrimitive { f: u64, cond: u64 },
    #[error("character is trivial; a nontrivial character is required")]
    TrivialCharacter,
    #[error("character has the wrong parity for this operation (expected {expected})")]
    Parity { expected: &'static str },
    #[error("character order {order} is divisible by p = {p}; prime-to-p order is required")]
    OrderNotPrimeToP { order: u64, p: u64 },
    #[error("character value at p is not 1: the split hypothesis fails")]
    NotSplit,
    #[error("conductor f = {f} must be coprime to p = {p}")]
    ConductorNotCoprime { f: u64, p: u64 },
    #[error("branch character must be even: chi * omega^j has odd parity")]
    BranchParity,
    #[error("regularizer c = {c} must satisfy gcd(c, 2 * level) = 1 at level {level}")]
    BadRegularizer { c: u64, level: u64 },
    #[error("regularizer c = {c} is congruent to 1 modulo the level: removal factor is not a unit")]
    RegularizerCongruentOne { c: u64 },
    #[error("removal factor for c = {c} is not a unit on this branch")]
    RemovalFactorNotUnit { c: u64 },
    #[error("no admissible regularizer below the search bound for this branch")]
    NoAdmissibleRegularizer,
    #[error("truncation order M = {m} is insufficient: {why}")]
    TruncationInsufficient { m: usize, why: String },
    #[error("series substitution requires a zero constant term")]
    NonzeroConstantTerm,
    #[error("series evaluation point must have positive valuation for the tail bound (got valuation 0)")]
    EvaluationTail,
    #[error("requested degree {degree} exceeds the moment precision available (bound exponent {bound})")]
    MomentPrecision { degree: usize, bound: i64 },
    #[error("discriminant {0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
    #[error("p = {p} does not split: the quadratic character at p is {value}")]
    NotSplitQuadratic { p: u64, value: i64 },
    #[error("norm-form search bound exceeded for discriminant {d} and p = {p}")]
    NormFormSearch { d: u64, p: u64 },
    #[error("no embedding of the p-unit has valuation equal to the class number")]
    EmbeddingValuation,
    #[error("class number h = {h} is divisible by p = {p}; the scaled logarithm is not defined here")]
    ClassNumberDivisibleByP { h: u64, p: u64 },
    #[error("tower conductor f = 1 degenerates; only the regularized uniformizer path handles it")]
    TowerDegenerate,
    #[error("norm-operator coherence check failed at coefficient {index}")]
    NormIdentity { index: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
