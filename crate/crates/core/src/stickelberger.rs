//! Exact Stickelberger elements in rational group rings of `(Z/M)^*`.
//!
//! The Stickelberger element of level `M` is
//! `theta_M = sum_{a in (Z/M)^*} (a/M - 1/2) sigma_a^{-1}`
//! with exact rational coefficients.  Characters project it onto generalized
//! Bernoulli numbers: `chi(theta_M) = B_{1, chi^{-1}}` (Bernoulli taken at
//! modulus `M`), which is the bridge between the group-ring side and the
//! L-value side used by every downstream check.
//!
//! Two structural facts are exercised as oracles here and relied on
//! elsewhere:
//!
//! * regularization: for `gcd(c, 2M) = 1`, `c != 1 mod M`, the element
//!   `theta_c = (1 - c sigma_c^{-1}) theta_M` has integer coefficients;
//! * level coherence: pushing `theta_{M l}` down to level `M` yields
//!   `(1 - sigma_l^{-1}) theta_M` for a prime `l` not dividing `M`, and
//!   `theta_M` itself when `l | M` — the distribution relation that makes
//!   the p-power tower of these elements norm-compatible.
//!
//! Levels here stay small (these are exact `BigRational` objects used as
//! test oracles and for reports); the streaming mod-`p^N` construction of
//! the same data at tower levels lives in [`crate::iwasawa`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cyclo_field::CycRational;
use crate::dirichlet::DirichletCharacter;
use crate::error::{Error, Result};

/// An element of `Q[(Z/M)^*]`, coefficients keyed by unit residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    m: u64,
    coeffs: BTreeMap<u64, BigRational>,
}

impl GroupRingElement {
    pub fn zero(m: u64) -> Self {
        GroupRingElement {
            m,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn level(&self) -> u64 {
        self.m
    }

    /// Coefficient of `sigma_a` (zero when absent; `a` is reduced mod `M`).
    pub fn coeff(&self, a: u64) -> BigRational {
        self.coeffs
            .get(&(a % self.m))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&u64, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    fn insert_add(&mut self, a: u64, v: BigRational) {
        let key = a % self.m;
        let entry = self
            .coeffs
            .entry(key)
            .or_insert_with(BigRational::zero);
        *entry += v;
        if entry.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "group-ring levels differ");
        let mut out = self.clone();
        for (&a, v) in &other.coeffs {
            out.insert_add(a, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigRational::from(BigInt::from(-1))))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero(self.m);
        }
        GroupRingElement {
            m: self.m,
            coeffs: self.coeffs.iter().map(|(&a, v)| (a, v * r)).collect(),
        }
    }

    /// Left multiplication by the group element `sigma_s` (unit `s`).
    pub fn translate(&self, s: u64) -> Self {
        assert_eq!(s.gcd(&self.m), 1, "translation by a non-unit");
        let mut out = Self::zero(self.m);
        for (&a, v) in &self.coeffs {
            out.insert_add(
                ((s as u128 * a as u128) % self.m as u128) as u64,
                v.clone(),
            );
        }
        out
    }

    /// Push down along `(Z/M)^* -> (Z/M')^*` for `M' | M` (coefficients of a
    /// fiber add up).
    pub fn push_down(&self, target: u64) -> Self {
        assert!(self.m % target == 0 && target >= 1);
        let mut out = Self::zero(target);
        for (&a, v) in &self.coeffs {
            out.insert_add(a % target, v.clone());
        }
        out
    }

    /// Apply a character: `chi(sum c_a sigma_a) = sum c_a chi(a)`, exactly.
    /// The character must live at this level.
    pub fn project(&self, chi: &DirichletCharacter) -> CycRational {
        assert_eq!(chi.modulus(), self.m, "character level mismatch");
        let mut acc = CycRational::zero(chi.order());
        for (&a, v) in &self.coeffs {
            let val = chi.evaluate_cyc(a);
            if !val.is_zero() {
                acc = acc.add(&val.mul_rational(v));
            }
        }
        acc
    }
}

/// The Stickelberger element `theta_M` (level `M >= 2`).
pub fn theta(m: u64) -> Result<GroupRingElement> {
    if m < 2 {
        return Err(Error::BadModulus(m));
    }
    let mut out = GroupRingElement::zero(m);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for a in 1..m {
        if a.gcd(&m) != 1 {
            continue;
        }
        let coeff = BigRational::new(BigInt::from(a), BigInt::from(m)) - &half;
        // coefficient sits at sigma_a^{-1}
        let a_inv = mod_inverse(a, m);
        out.insert_add(a_inv, coeff);
    }
    Ok(out)
}

/// The regularized element `(1 - c sigma_c^{-1}) theta_M`, which is integral
/// whenever `gcd(c, 2M) = 1` and `c != 1 (mod M)`.
pub fn regularize(theta: &GroupRingElement, c: u64) -> Result<GroupRingElement> {
    let m = theta.level();
    if c.gcd(&(2 * m)) != 1 {
        return Err(Error::BadRegularizer { c, level: m });
    }
    if c % m == 1 {
        return Err(Error::RegularizerCongruentOne { c });
    }
    let c_inv = mod_inverse(c % m, m);
    let shifted = theta
        .translate(c_inv)
        .scale(&BigRational::from(BigInt::from(c)));
    let out = theta.sub(&shifted);
    if !out.is_integral() {
        return Err(Error::Internal(
            "regularized Stickelberger element failed integrality".into(),
        ));
    }
    Ok(out)
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    crate::ring::invm(a, m).expect("unit residue")
}
