//! Character-weighted cyclotomic units and their p-adic logarithms.
//!
//! For a nontrivial character `chi` of conductor `f` prime to `p`, the tame
//! weighted unit is the formal combination
//!
//! ```text
//!     sum over units a mod f  of  chi^{-1}(a) * [1 - zeta_f^a] ,
//! ```
//!
//! stored with exact cyclotomic coefficients.  Applying the ring embedding
//! `zeta_f -> teich`-root and the Iwasawa logarithm termwise gives the
//! weighted logarithm
//!
//! ```text
//!     S(chi) = sum_a chi^{-1}(a) log_p(1 - zeta_f^a)  in  W ,
//! ```
//!
//! each term lying in `pW` because the logarithm kills Teichmuller parts.
//! For even `chi` this is the regulator-type quantity entering the p-adic
//! Kronecker limit formula
//!
//! ```text
//!     L_p(1, chi) = -(1 - chi(p)/p) * (tau(chi)/f) * S(chi) ,
//! ```
//!
//! which [`kronecker_rhs`] computes exactly as written: `S(chi)` is in `pW`,
//! so multiplying by `p - chi(p)` and dividing by `p` is an exact rescale
//! costing one digit of precision.
//!
//! # Wild levels
//!
//! Levels `f p^{n+1}` involve `zeta_p`, which is ramified and therefore not
//! representable in `W`.  Norm-compatibility across the wild tower is pinned
//! by exact cyclotomic identities instead (`prod over the fiber b = a mod f
//! of (1 - zeta_fp^b) = 1 - zeta_f^a` under the compatible-power convention
//! `zeta_f = zeta_fp^p`), and only the level-`f` consequences are asserted
//! p-adically; see the tests.

use std::collections::BTreeMap;

use crate::cyclo_field::CycRational;
use crate::dirichlet::DirichletCharacter;
use crate::error::{Error, Result};
use crate::ring::{PadicElement, UnramifiedWitnessRing};

/// A formal sum of terms `e_a * [1 - zeta_m^a]` over units `a mod m`, with
/// exact cyclotomic coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCyclotomicSum {
    level: u64,
    coeffs: BTreeMap<u64, CycRational>,
}

impl WeightedCyclotomicSum {
    /// Build from a coefficient map; keys are reduced mod `level` and must
    /// be units (in particular nonzero).
    pub fn new(level: u64, coeffs: BTreeMap<u64, CycRational>) -> Result<Self> {
        if level < 2 {
            return Err(Error::BadModulus(level));
        }
        let mut reduced = BTreeMap::new();
        for (a, e) in coeffs {
            let a = a % level;
            if gcd(a, level) != 1 {
                return Err(Error::BadModulus(level));
            }
            reduced.insert(a, e);
        }
        Ok(WeightedCyclotomicSum {
            level,
            coeffs: reduced,
        })
    }

    /// The root-of-unity order `m` of the terms.
    pub fn level(&self) -> u64 {
        self.level
    }

    /// Coefficient at `a` (zero when absent).
    pub fn coeff(&self, a: u64) -> CycRational {
        self.coeffs
            .get(&(a % self.level))
            .cloned()
            .unwrap_or_else(|| CycRational::zero(1))
    }

    /// Terms in ascending order of `a`.
    pub fn terms(&self) -> impl Iterator<Item = (&u64, &CycRational)> {
        self.coeffs.iter()
    }

    /// The Galois action `delta_b`: sends `[1 - zeta^a]` to `[1 - zeta^{ab}]`,
    /// i.e. re-indexes the coefficient map by `a -> ab`.
    pub fn galois(&self, b: u64) -> Result<Self> {
        if gcd(b % self.level, self.level) != 1 {
            return Err(Error::BadModulus(self.level));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, e)| ((a * (b % self.level)) % self.level, e.clone()))
            .collect();
        Self::new(self.level, coeffs)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Embed an exact cyclotomic number into the ring via the deterministic
/// root-of-unity choice `zeta_n -> ring.zeta(n)`.  The coefficients must be
/// p-integral.
pub fn embed_cyc(ring: &UnramifiedWitnessRing, x: &CycRational) -> Result<PadicElement> {
    let n = x.level();
    let zeta = ring.zeta(n)?;
    let mut acc = ring.zero();
    let mut pow = ring.one();
    for q in x.coeffs() {
        acc = acc.add(&ring.from_rational(q)?.mul(&pow));
        pow = pow.mul(&zeta);
    }
    Ok(acc)
}

/// The tame weighted unit for a nontrivial character: coefficient
/// `chi^{-1}(a)` at every unit `a mod f`, `f` the conductor.
pub fn tame_unit(chi: &DirichletCharacter) -> Result<WeightedCyclotomicSum> {
    if chi.is_trivial() {
        return Err(Error::TrivialCharacter);
    }
    let f = chi.conductor();
    let inv = chi.inverse();
    let mut coeffs = BTreeMap::new();
    for a in 1..f {
        if gcd(a, f) != 1 {
            continue;
        }
        coeffs.insert(a, inv.evaluate_cyc(a % chi.modulus()));
    }
    WeightedCyclotomicSum::new(f, coeffs)
}

/// Weighted p-adic logarithm: `sum_a e_a * log_p(1 - zeta_m^a)` with the
/// ring's root-of-unity embedding, summed in ascending order of `a`.
///
/// Requires `p` prime to the level (each `1 - zeta_m^a` is then a unit of
/// `W`) and a ring certifying both the level and the coefficient values.
pub fn padic_log_embedding(
    u: &WeightedCyclotomicSum,
    ring: &UnramifiedWitnessRing,
) -> Result<PadicElement> {
    if u.level % ring.p() == 0 {
        return Err(Error::ConductorNotCoprime {
            f: u.level,
            p: ring.p(),
        });
    }
    let zeta = ring.zeta(u.level)?;
    let mut acc = ring.zero();
    for (&a, e) in u.terms() {
        let one_minus = ring.one().sub(&zeta.pow_u64(a));
        let term = embed_cyc(ring, e)?.mul(&one_minus.iwasawa_log()?);
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Guard shared by the even-side quantities: `chi` primitive, even,
/// nontrivial, conductor prime to `p`.
pub(crate) fn require_even_tame(chi: &DirichletCharacter, ring: &UnramifiedWitnessRing) -> Result<()> {
    if chi.is_trivial() {
        return Err(Error::TrivialCharacter);
    }
    if !chi.is_primitive() {
        return Err(Error::NotPrimitive {
            f: chi.modulus(),
            cond: chi.conductor(),
        });
    }
    if chi.is_odd() {
        return Err(Error::Parity { expected: "even" });
    }
    if chi.conductor() % ring.p() == 0 {
        return Err(Error::ConductorNotCoprime {
            f: chi.conductor(),
            p: ring.p(),
        });
    }
    Ok(())
}

/// The weighted logarithm of the tame unit, `S(chi) = sum_a chi^{-1}(a)
/// log_p(1 - zeta_f^a)`, for even nontrivial `chi` with `chi(p) = 1`.
///
/// Under `chi(p) = 1` this value is the valuation-at-`v_0` coordinate of the
/// tame unit in the one-dimensional exceptional subspace; it is the quantity
/// the even-side height identities are built from.
pub fn solomon_valuation(
    chi: &DirichletCharacter,
    ring: &UnramifiedWitnessRing,
) -> Result<PadicElement> {
    require_even_tame(chi, ring)?;
    if chi.value_exponent(ring.p()) != Some(0) {
        return Err(Error::NotSplit);
    }
    padic_log_embedding(&tame_unit(chi)?, ring)
}

/// The p-adic Kronecker limit value
/// `-(1 - chi(p)/p) * (tau(chi)/f) * S(chi)` for even primitive nontrivial
/// `chi`.  Computed as `-(p - chi(p)) * (tau(chi)/f) * S(chi) / p`; the
/// division is an exact rescale because `S(chi)` lies in `pW`, and costs one
/// digit of precision.
///
/// The ring must certify `lcm(order, f)` for the Gauss sum embedding.
pub fn kronecker_rhs(
    chi: &DirichletCharacter,
    ring: &UnramifiedWitnessRing,
) -> Result<PadicElement> {
    require_even_tame(chi, ring)?;
    let p = ring.p();
    let f = chi.conductor();
    let s = padic_log_embedding(&tame_unit(chi)?, ring)?;
    let tau = embed_cyc(ring, &chi.gauss_sum_exact())?;
    let chi_p = chi.evaluate_ring(p, ring)?;
    let euler_num = ring.from_u64(p).sub(&chi_p);
    let f_inv = ring.from_u64(f).inverse()?;
    euler_num
        .mul(&tau)
        .mul(&f_inv)
        .mul(&s)
        .neg()
        .rescale_down(1)
}
