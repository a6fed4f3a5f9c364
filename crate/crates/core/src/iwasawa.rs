//! Branch power series of p-adic L-functions.
//!
//! For an odd prime `p`, a primitive Dirichlet character `chi` of conductor
//! `f` prime to `p` and of prime-to-`p` order, and a twist exponent `j`, the
//! branch character `psi = chi * omega^j` (with `omega` the Teichmuller
//! character mod `p`) must be even.  The branch series `L(T)` over `W` is
//! pinned down by the interpolation property
//!
//! ```text
//!     L((1+p)^k - 1) = -(1 - eta(p) p^{k-1}) B_{k,eta} / k ,
//!     eta = chi * omega^{j-k} ,
//! ```
//!
//! for every integer `k >= 1`; evaluating at `T = (1+p)^{1-s} - 1` gives the
//! p-adic L-function `L_p(s, psi)`.
//!
//! # Construction
//!
//! Fix a level `n` and put `q = f * p^{n+1}`.  The Stickelberger element at
//! level `q`, regularized by an auxiliary integer `c` (odd, prime to `fp`,
//! with `psi(c) != 1`), has integer coefficients
//!
//! ```text
//!     e_a = (a - c*b)/q + (c-1)/2 ,       b = a * c^{-1} mod q .
//! ```
//!
//! Splitting each unit `a mod q` into tame part, Teichmuller part and
//! one-unit part `<a>`, and projecting by `xi = chi * omega^{j-1}`, gives the
//! group-algebra vector
//!
//! ```text
//!     A[t] = sum over a with dlog_{1+p} <a> = t  of  e_a * xi(a)
//! ```
//!
//! in `W[Z/p^n]`.  The series is `-Tw(A) / (1 - psi(c) tau_c)` expressed in
//! the basis `[t] -> (1+T)^t` (binomial transform), where `Tw` scales the
//! coefficient at `[t]` by `(1+p)^{-t}` and `tau_c = [dlog <c>]`.  The
//! removal factor is a unit because `psi(c)` is a nontrivial root of unity of
//! order prime to `p`, so the division is exact.
//!
//! # Precision
//!
//! The level-`n` vector determines the series modulo the image of
//! `(1+T)^{p^n} - 1` under `Tw`, and the identification of the removal factor
//! with `1 - psi(c) tau_c` holds up to `c <c>^{-1} = omega(c) + O(p^{n+1})`.
//! Coefficient `m` is therefore correct modulo `p^{pi_m}` with
//!
//! ```text
//!     pi_0 = min(N, n+1) ,     pi_m = min(N, n - floor(log_p m))   (m >= 1),
//! ```
//!
//! where `N` is the working ring precision.  Evaluation at points of
//! valuation >= 1 is then good modulo `p^min(N, n+1, M)` with `M` the number
//! of retained coefficients; `build_series` requires `p^n >= M` so that every
//! retained coefficient carries at least one digit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::cyclo_field::{bernoulli_numbers, binomial};
use crate::dirichlet::{CharacterDescriptor, DirichletCharacter};
use crate::error::{Error, Result};
use crate::ring::{
    addm, checked_pow, invm, mulm, powm, ElementDescriptor, PadicElement, PadicScaled,
    UnramifiedWitnessRing,
};
use crate::series::TruncatedSeries;

/// A branch series together with the data that produced it.
#[derive(Clone, Debug)]
pub struct BranchSeries {
    chi: DirichletCharacter,
    twist: u64,
    regularizer: u64,
    level: u32,
    series: TruncatedSeries,
}

impl BranchSeries {
    /// The tame character `chi`.
    pub fn chi(&self) -> &DirichletCharacter {
        &self.chi
    }
    /// The twist exponent `j` (reduced mod `p-1`); the branch character is
    /// `chi * omega^j`.
    pub fn twist(&self) -> u64 {
        self.twist
    }
    /// The auxiliary regularizer `c` used in the construction.
    pub fn regularizer(&self) -> u64 {
        self.regularizer
    }
    /// The tower level `n`: the series was computed at level `f p^{n+1}`.
    pub fn level(&self) -> u32 {
        self.level
    }
    /// The underlying truncated series in `T` with per-coefficient precision.
    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }
    /// Number of guaranteed digits for evaluations at valuation >= 1 points:
    /// `min(N, n+1, M)`.
    pub fn n_eff(&self) -> u32 {
        let ring = self.series.ring();
        ring.precision()
            .min(self.level + 1)
            .min(self.series.len() as u32)
    }

    /// `L_p(s, psi)` for an integer `s`: the series at `T = (1+p)^{1-s} - 1`.
    pub fn lp_eval(&self, s: i64) -> Result<PadicElement> {
        let t = self.argument(s);
        self.series.eval_at(&t)
    }

    /// `d/ds L_p(s, psi)` for an integer `s`: by the chain rule this is
    /// `-log(1+p) * (1+p)^{1-s} * L'((1+p)^{1-s} - 1)`.
    pub fn lp_derivative(&self, s: i64) -> Result<PadicElement> {
        let ring = self.series.ring();
        let t = self.argument(s);
        let inner = self.series.derivative().eval_at(&t)?;
        let one_plus_p = ring.from_u64(ring.p() + 1);
        let scale = one_plus_p.pow_u64(self.exponent_mod_order(1 - s));
        let log_1p = one_plus_p.iwasawa_log()?;
        Ok(inner.mul(&scale).mul(&log_1p).neg())
    }

    /// The evaluation point `T = (1+p)^{1-s} - 1`, exact to full precision.
    fn argument(&self, s: i64) -> PadicElement {
        let ring = self.series.ring();
        let one_plus_p = ring.from_u64(ring.p() + 1);
        one_plus_p
            .pow_u64(self.exponent_mod_order(1 - s))
            .sub(&ring.one())
    }

    /// Reduce an integer exponent modulo `p^{N-1}`, the order of `1+p`
    /// modulo `p^N`.
    fn exponent_mod_order(&self, z: i64) -> u64 {
        let ring = self.series.ring();
        let order = ring.pn() / ring.p();
        z.rem_euclid(order as i64) as u64
    }

    /// Serializable snapshot (used by the on-disk cache).
    pub fn descriptor(&self) -> BranchSeriesDescriptor {
        BranchSeriesDescriptor {
            ring: self.series.ring().descriptor(),
            chi: self.chi.descriptor(),
            twist: self.twist.to_string(),
            regularizer: self.regularizer.to_string(),
            level: self.level.to_string(),
            coeffs: self.series.coeffs().iter().map(|c| c.descriptor()).collect(),
        }
    }

    /// Rebuild from a descriptor.  The ring and character are reconstructed
    /// through their own validating paths; the coefficients are trusted as
    /// stored (cache integrity is the caller's concern).
    pub fn from_descriptor(desc: &BranchSeriesDescriptor) -> Result<BranchSeries> {
        let ring = desc.ring.build()?;
        let chi = crate::dirichlet::character_from_descriptor(&desc.chi)?;
        let parse = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::Internal(format!("bad integer in descriptor: {s}")))
        };
        let coeffs = desc
            .coeffs
            .iter()
            .map(|d| PadicElement::from_descriptor(&ring, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchSeries {
            chi,
            twist: parse(&desc.twist)?,
            regularizer: parse(&desc.regularizer)?,
            level: parse(&desc.level)? as u32,
            series: TruncatedSeries::new(&ring, coeffs),
        })
    }
}

/// Serialized form of a [`BranchSeries`] (all integers as decimal strings).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchSeriesDescriptor {
    pub ring: crate::ring::RingDescriptor,
    pub chi: CharacterDescriptor,
    pub twist: String,
    pub regularizer: String,
    pub level: String,
    pub coeffs: Vec<ElementDescriptor>,
}

/// Check the standing hypotheses on `(chi, j)` and return the reduced twist.
fn validate_branch(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j: u64,
) -> Result<u64> {
    let p = ring.p();
    if !chi.is_primitive() {
        return Err(Error::NotPrimitive {
            f: chi.modulus(),
            cond: chi.conductor(),
        });
    }
    if chi.conductor() % p == 0 {
        return Err(Error::ConductorNotCoprime {
            f: chi.conductor(),
            p,
        });
    }
    if chi.order() % p == 0 {
        return Err(Error::OrderNotPrimeToP {
            order: chi.order(),
            p,
        });
    }
    let j_red = j % (p - 1);
    // psi = chi * omega^j must be even: chi(-1) * (-1)^j = 1.  p is odd, so
    // reduction mod p-1 preserves the parity of j.
    if chi.is_odd() != (j_red % 2 == 1) {
        return Err(Error::BranchParity);
    }
    Ok(j_red)
}

/// Smallest admissible regularizer: the least `c > 1` with `gcd(c, 2fp) = 1`
/// and `psi(c) != 1`.  Errors with [`Error::NoAdmissibleRegularizer`] exactly
/// when `psi` is trivial (the branch with a pole).
pub fn admissible_regularizer(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j: u64,
) -> Result<u64> {
    let j_red = validate_branch(ring, chi, j)?;
    let p = ring.p();
    let f = chi.conductor();
    // psi is a character of (Z/fp)^*; if it is nontrivial, some unit in
    // [2, 2fp+1] detects that, and the window always contains an odd
    // representative of each unit class.
    for c in 2..=2 * f * p + 1 {
        if gcd(c, 2 * f * p) != 1 {
            continue;
        }
        let psi_c = branch_value(ring, chi, j_red, c)?;
        let delta = ring.one().sub(&psi_c);
        if delta.valuation() == Some(0) {
            return Ok(c);
        }
    }
    Err(Error::NoAdmissibleRegularizer)
}

/// `psi(c) = chi(c) * teich(c)^j` in the ring, for `c` prime to `fp`.
fn branch_value(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j_red: u64,
    c: u64,
) -> Result<PadicElement> {
    let omega_c = ring.from_u64(c % ring.p()).teichmuller()?;
    Ok(chi.evaluate_ring(c, ring)?.mul(&omega_c.pow_u64(j_red)))
}

/// Teichmuller representative of `r` as a scalar modulo `p^{n+1}`:
/// the limit of `r^(p^k)`.
fn teich_scalar(r: u64, p: u64, pn1: u64, n: u32) -> u64 {
    let mut z = r % pn1;
    for _ in 0..n + 2 {
        z = powm(z, p, pn1);
    }
    z
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

/// The regularized, `xi`-projected level vector `A[t]`, `t` in `Z/p^n`,
/// accumulated by streaming over the units of `Z/(f p^{n+1})`.
fn level_vector(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j_red: u64,
    level: u32,
    c: u64,
) -> Result<Vec<PadicElement>> {
    let p = ring.p();
    let f = chi.conductor();
    let d = ring.degree();
    let n_ring = ring.precision();
    let pn_ring = ring.pn();

    let pn1 = checked_pow(p, level + 1, 1 << 62).ok_or(Error::PrecisionCap { p, n: level + 1 })?;
    let pn = pn1 / p;
    let q = f
        .checked_mul(pn1)
        .ok_or(Error::PrecisionCap { p, n: level + 1 })?;

    // Scalar Teichmuller inverses mod p^{n+1}, for the one-unit projection.
    let mut teich_inv = vec![0u64; p as usize];
    for r in 1..p {
        teich_inv[r as usize] = invm(teich_scalar(r, p, pn1, level), pn1)?;
    }

    // Discrete logarithm of the one-units: position (u-1)/p mod p^n -> t.
    let mut dlog_gamma = vec![0u64; pn as usize];
    let mut u = 1u64;
    for t in 0..pn {
        dlog_gamma[(((u - 1) / p) % pn) as usize] = t;
        u = mulm(u, p + 1, pn1);
    }

    // chi exponent per residue mod f, and xi-value table as raw limbs:
    // val[(k*(p-1) + (r-1)) * d ..] = zeta_ord^k * teich(r)^{j-1}.
    let chi_exp: Vec<Option<u64>> = (0..f).map(|r| chi.value_exponent(r)).collect();
    let e_xi = (j_red + p - 2) % (p - 1);
    let ord = chi.order();
    let zeta = ring.zeta(ord)?;
    let mut val = vec![0u64; (ord as usize) * (p as usize - 1) * d];
    {
        let mut zeta_pow = ring.one();
        for k in 0..ord {
            for r in 1..p {
                let w = ring.from_u64(r).teichmuller()?.pow_u64(e_xi);
                let entry = zeta_pow.mul(&w);
                let base = (k as usize * (p as usize - 1) + (r as usize - 1)) * d;
                val[base..base + d].copy_from_slice(entry.coeffs());
            }
            zeta_pow = zeta_pow.mul(&zeta);
        }
    }

    let c_inv_q = invm(c, q)?;
    let half = (c - 1) / 2;
    let mut acc = vec![0u64; pn as usize * d];

    let mut b = 0u64;
    for a in 1..q {
        b = addm(b, c_inv_q, q);
        let r_p = (a % p) as usize;
        if r_p == 0 {
            continue;
        }
        let k = match chi_exp[(a % f) as usize] {
            Some(k) => k,
            None => continue,
        };
        let e_a = (a as i128 - c as i128 * b as i128) / q as i128 + half as i128;
        let e_mod = e_a.rem_euclid(pn_ring as i128) as u64;
        if e_mod == 0 {
            continue;
        }
        let u = mulm(a % pn1, teich_inv[r_p], pn1);
        let t = dlog_gamma[(((u - 1) / p) % pn) as usize] as usize;
        let base = (k as usize * (p as usize - 1) + (r_p - 1)) * d;
        let row = t * d;
        for i in 0..d {
            acc[row + i] = addm(acc[row + i], mulm(e_mod, val[base + i], pn_ring), pn_ring);
        }
    }

    (0..pn as usize)
        .map(|t| ring.from_coeffs(acc[t * d..(t + 1) * d].to_vec(), n_ring))
        .collect()
}

/// Solve `(1 - s tau) X = rhs` in `W[Z/p^n]`, where `tau` shifts the group
/// index by `t_c`.  Walk each coset of `<t_c>`: the cyclic recurrence closes
/// with the unit `1 - s^len`.
fn divide_removal(
    rhs: &[PadicElement],
    s: &PadicElement,
    t_c: u64,
    c: u64,
) -> Result<Vec<PadicElement>> {
    let pn = rhs.len() as u64;
    let g = if t_c == 0 { pn } else { gcd(t_c, pn) };
    let len = (pn / g) as usize;
    let s_len = s.pow_u64(len as u64);
    let closure = s
        .ring()
        .one()
        .sub(&s_len)
        .inverse()
        .map_err(|_| Error::RemovalFactorNotUnit { c })?;

    let mut out = vec![s.ring().zero(); rhs.len()];
    for start in 0..g {
        let idx: Vec<usize> = (0..len)
            .map(|k| ((start + k as u64 * t_c) % pn) as usize)
            .collect();
        // X_0 = (1 - s^len)^{-1} * sum_i s^i * rhs[-i]; Horner from the
        // highest power s^{len-1} rhs[1] down to s^0 rhs[0].
        let mut x0 = rhs[idx[1 % len]].clone();
        for k in 2..=len {
            x0 = x0.mul(s).add(&rhs[idx[k % len]]);
        }
        x0 = x0.mul(&closure);
        out[idx[0]] = x0;
        for k in 1..len {
            out[idx[k]] = rhs[idx[k]].add(&s.mul(&out[idx[k - 1]]));
        }
    }
    Ok(out)
}

/// Build the branch series for `(chi, j)` at tower level `level`, retaining
/// `m_len` coefficients of `T`.
///
/// Requirements: `chi` primitive with conductor and order prime to `p`,
/// `chi * omega^j` even and nontrivial, `p^level >= m_len >= 1`, and the ring
/// must certify the order of `chi`.
pub fn build_series(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j: u64,
    level: u32,
    m_len: usize,
) -> Result<BranchSeries> {
    let j_red = validate_branch(ring, chi, j)?;
    let p = ring.p();
    if m_len == 0 {
        return Err(Error::TruncationInsufficient {
            m: 0,
            why: "at least one coefficient is required".into(),
        });
    }
    let pn = checked_pow(p, level, 1 << 62).ok_or(Error::PrecisionCap { p, n: level })?;
    if (m_len as u64) > pn {
        return Err(Error::TruncationInsufficient {
            m: m_len,
            why: format!("level {level} determines at most p^{level} = {pn} coefficients"),
        });
    }

    let c = admissible_regularizer(ring, chi, j_red)?;
    let a_vec = level_vector(ring, chi, j_red, level, c)?;

    // Negate and twist: coefficient at [t] scaled by -(1+p)^{-t}.
    let pn_ring = ring.pn();
    let w_inv = invm(p + 1, pn_ring)?;
    let mut scale = 1u64;
    let twisted: Vec<PadicElement> = a_vec
        .iter()
        .map(|x| {
            let y = x.mul_scalar(scale).neg();
            scale = mulm(scale, w_inv, pn_ring);
            y
        })
        .collect();

    // Divide by the removal factor 1 - psi(c) tau_c.
    let s = branch_value(ring, chi, j_red, c)?;
    let pn1 = checked_pow(p, level + 1, 1 << 62).ok_or(Error::PrecisionCap { p, n: level + 1 })?;
    let t_c = {
        let u = mulm(
            c % pn1,
            invm(teich_scalar(c % p, p, pn1, level), pn1)?,
            pn1,
        );
        // dlog of <c>: scan is unnecessary; recompute via the generator walk.
        let mut t = 0u64;
        let mut v = 1u64;
        let pn_level = pn1 / p;
        while v != u {
            v = mulm(v, p + 1, pn1);
            t += 1;
            debug_assert!(t < pn_level * p);
        }
        t % pn_level
    };
    let x_vec = divide_removal(&twisted, &s, t_c, c)?;

    // Binomial transform to T-coefficients: c_m = sum_t X[t] * C(t, m),
    // with a rolling Pascal row C(t, m) mod p^N.
    let d = ring.degree();
    let n_ring = ring.precision();
    let mut out = vec![0u64; m_len * d];
    let mut row = vec![0u64; m_len];
    row[0] = 1;
    for (t, x) in x_vec.iter().enumerate() {
        let limbs = x.coeffs();
        for m in 0..m_len.min(t + 1) {
            if row[m] == 0 {
                continue;
            }
            for i in 0..d {
                out[m * d + i] = addm(out[m * d + i], mulm(row[m], limbs[i], pn_ring), pn_ring);
            }
        }
        for m in (1..m_len).rev() {
            row[m] = addm(row[m], row[m - 1], pn_ring);
        }
    }

    // Per-coefficient precision.
    let coeffs = (0..m_len)
        .map(|m| {
            let elem = ring.from_coeffs(out[m * d..(m + 1) * d].to_vec(), n_ring)?;
            let pi = if m == 0 {
                n_ring.min(level + 1)
            } else {
                n_ring.min(level - (m as u64).ilog(p))
            };
            Ok(elem.truncated(pi))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BranchSeries {
        chi: chi.clone(),
        twist: j_red,
        regularizer: c,
        level,
        series: TruncatedSeries::new(ring, coeffs),
    })
}

/// The exact interpolation target `-(1 - eta(p) p^{k-1}) B_{k,eta} / k` with
/// `eta = chi * omega^{j-k}`, computed p-adically at level `fp`.
///
/// The level-`fp` generalized Bernoulli number equals the primitive one times
/// the Euler factor `1 - eta(p) p^{k-1}` (the only prime of `fp` that can
/// miss the conductor of `eta` is `p`), so a single level-`fp` sum yields the
/// complete right-hand side:
///
/// ```text
///     B_{k,eta}^{(fp)} = sum_{i=0..k} C(k,i) B_i (fp)^{i-1} S_i ,
///     S_i = sum_{a mod fp} eta(a) a^{k-i} .
/// ```
pub fn interpolation_rhs(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j: u64,
    k: u64,
) -> Result<PadicScaled> {
    let j_red = validate_branch(ring, chi, j)?;
    assert!(k >= 1, "interpolation targets need k >= 1");
    let p = ring.p();
    let f = chi.conductor();
    let lev = f * p;
    let e_eta = (j_red as i64 - k as i64).rem_euclid(p as i64 - 1) as u64;
    let pn_ring = ring.pn();

    // Power sums S_i = sum_a eta(a) a^{k-i} in the ring.
    let mut sums = vec![ring.zero(); k as usize + 1];
    for a in 1..lev {
        if a % p == 0 {
            continue;
        }
        let chi_a = match chi.value_exponent(a) {
            Some(e) => ring.zeta(chi.order())?.pow_u64(e),
            None => continue,
        };
        let eta_a = chi_a.mul(&ring.from_u64(a % p).teichmuller()?.pow_u64(e_eta));
        for (i, sum) in sums.iter_mut().enumerate() {
            let a_pow = ring.from_u64(powm(a % pn_ring, k - i as u64, pn_ring));
            *sum = sum.add(&eta_a.mul(&a_pow));
        }
    }

    let bern = bernoulli_numbers(k as usize);
    let lev_big = BigRational::from(BigInt::from(lev));
    let mut total = PadicScaled::from_elem(ring.zero());
    for i in 0..=k {
        let rat = BigRational::from(binomial(k, i))
            * bern[i as usize].clone()
            * lev_big.clone().pow(i as i32 - 1);
        let (elem, shift) = ring.from_rational_scaled(&rat);
        total = total.add(&PadicScaled::new(elem.mul(&sums[i as usize]), shift));
    }
    Ok(total.div_exact_u64(k)?.neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::character;
    use crate::stickelberger::{regularize, theta};

    fn ring(p: u64, n: u32, orders: &[u64]) -> UnramifiedWitnessRing {
        UnramifiedWitnessRing::build(p, n, orders).unwrap()
    }

    /// chi_{-4}: the odd quadratic character mod 4 (index 1 of 2).
    fn chi_m4() -> DirichletCharacter {
        let chi = character(4, 1).unwrap();
        assert!(chi.is_odd() && chi.order() == 2);
        chi
    }

    /// chi_8: the even quadratic character mod 8 with chi(7) = 1.
    fn chi_8() -> DirichletCharacter {
        let chi = character(8, 1).unwrap();
        assert!(!chi.is_odd() && chi.is_primitive());
        chi
    }

    #[test]
    fn branch_validation_rejects_bad_input() {
        let w = ring(5, 6, &[2]);
        // Wrong parity: chi_{-4} with even twist.
        assert!(matches!(
            build_series(&w, &chi_m4(), 0, 2, 4),
            Err(Error::BranchParity)
        ));
        // Imprimitive: the conductor-4 character induced mod 8.
        let imprim = character(8, 2).unwrap();
        assert!(!imprim.is_primitive());
        assert!(matches!(
            build_series(&w, &imprim, 1, 2, 4),
            Err(Error::NotPrimitive { .. })
        ));
        // Trivial branch (pole): no admissible regularizer exists.
        let triv = character(1, 0).unwrap();
        assert!(matches!(
            build_series(&w, &triv, 0, 2, 4),
            Err(Error::NoAdmissibleRegularizer)
        ));
        // Conductor divisible by p.
        let mod5 = character(5, 1).unwrap();
        assert!(matches!(
            build_series(&w, &mod5, 1, 2, 4),
            Err(Error::ConductorNotCoprime { .. })
        ));
        // Too many coefficients for the level.
        assert!(matches!(
            build_series(&w, &chi_m4(), 1, 1, 6),
            Err(Error::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn smallest_regularizer_is_found() {
        let w = ring(5, 6, &[2]);
        // f = 4, p = 5: c must be odd, prime to 5, with psi(c) != 1; c = 3
        // works because chi(3) omega(3) = -omega(3) has order 4.
        assert_eq!(admissible_regularizer(&w, &chi_m4(), 1).unwrap(), 3);
    }

    /// The streamed level vector equals the exact regularized Stickelberger
    /// projection, entry by entry, at a small level.
    #[test]
    fn level_vector_matches_exact_group_ring() {
        let p = 5u64;
        let w = ring(p, 6, &[2]);
        let chi = chi_m4();
        let (j, n, c) = (1u64, 1u32, 3u64);
        let streamed = level_vector(&w, &chi, j, n, c).unwrap();

        // Exact route: theta at level q = 100, regularized at c, then
        // projected by xi = chi * omega^{j-1} = chi and split by dlog <a>.
        let q = chi.conductor() * p.pow(n + 1);
        let reg = regularize(&theta(q).unwrap(), c).unwrap();
        let pn1 = p.pow(n + 1);
        let pn = p.pow(n);
        let mut exact = vec![w.zero(); pn as usize];
        for a in 1..q {
            if gcd(a, q) != 1 {
                continue;
            }
            // Coefficient of sigma_{a^{-1}} in the regularized element is the
            // streaming weight e_a.
            let e_a = reg.coeff(invm(a, q).unwrap());
            assert!(e_a.is_integer());
            let xi_a = chi.evaluate_ring(a, &w).unwrap();
            let u = mulm(a % pn1, invm(teich_scalar(a % p, p, pn1, n), pn1).unwrap(), pn1);
            let mut t = 0u64;
            let mut v = 1u64;
            while v != u {
                v = mulm(v, p + 1, pn1);
                t += 1;
            }
            let term = xi_a.mul(&w.from_bigint(e_a.numer()));
            exact[(t % pn) as usize] = exact[(t % pn) as usize].add(&term);
        }
        assert_eq!(streamed, exact);
    }

    /// Removal-factor division really inverts multiplication by
    /// `1 - s tau_c`, across cycle shapes (t_c zero, unit, and non-unit).
    #[test]
    fn removal_division_round_trips() {
        let w = ring(5, 6, &[2]);
        let pn = 25usize;
        let s = w.zeta(4).unwrap(); // a nontrivial prime-to-p root of unity
        let rhs: Vec<PadicElement> = (0..pn as u64).map(|t| w.from_u64(3 * t * t + 7)).collect();
        for t_c in [0u64, 3, 5, 10] {
            let x = divide_removal(&rhs, &s, t_c, 99).unwrap();
            for t in 0..pn {
                let shifted = &x[(t + pn - t_c as usize % pn) % pn];
                let back = x[t].sub(&s.mul(shifted));
                assert_eq!(back, rhs[t], "t_c = {t_c}, t = {t}");
            }
        }
    }

    /// Non-exceptional k = 1 value, checked against the exact rational
    /// L-value: for p = 7, chi_{-4}, j = 1 the target is
    /// -(1 - chi(7)) B_{1,chi} = 1 exactly.
    #[test]
    fn interpolation_at_k1_matches_exact_value() {
        let w = ring(7, 8, &[2]);
        let chi = chi_m4();
        let ls = build_series(&w, &chi, 1, 3, 8).unwrap();
        let lhs = ls.lp_eval(0).unwrap();
        assert_eq!(ls.n_eff(), 4);
        assert!(lhs.precision() >= 4);
        assert!(lhs.eq_mod(&w.one(), lhs.precision()));

        // The p-adic right-hand side agrees too; its absolute precision is
        // N - 1 = 7 (one digit spent on the 1/(fp) term of the level sum).
        let rhs = interpolation_rhs(&w, &chi, 1, 1).unwrap();
        assert!(rhs.agreement_exponent(&PadicScaled::from_elem(w.one())) >= 7);
    }

    /// Exceptional zero: for p = 5, chi_{-4}(5) = 1 kills the Euler factor
    /// at k = 1, so L_p(0, chi omega) vanishes to working precision.
    #[test]
    fn exceptional_zero_vanishes_at_s0() {
        let w = ring(5, 8, &[2]);
        let ls = build_series(&w, &chi_m4(), 1, 3, 8).unwrap();
        let lhs = ls.lp_eval(0).unwrap();
        assert!(lhs.precision() >= 4);
        assert!(lhs.is_zero());
        let rhs = interpolation_rhs(&w, &chi_m4(), 1, 1).unwrap();
        assert!(rhs.num().is_zero());
    }

    /// At k with k = j mod (p-1) the twist collapses to eta = chi, and the
    /// p-adic Bernoulli sum must match the exact rational Bernoulli number
    /// with its Euler factor.
    #[test]
    fn interpolation_rhs_matches_exact_bernoulli() {
        let w = ring(5, 8, &[2]);
        let chi = chi_m4();
        let k = 5u64;
        let rhs = interpolation_rhs(&w, &chi, 1, k).unwrap();

        // Exact: -(1 - chi(5) 5^{k-1}) B_{k,chi} / k as a rational number.
        let b = chi.bernoulli_exact(k).as_rational().unwrap();
        let euler = BigRational::from(BigInt::from(1 - 5i64.pow(4)));
        let exact = -(euler * b / BigRational::from(BigInt::from(k)));
        let (elem, shift) = w.from_rational_scaled(&exact);
        let expected = PadicScaled::new(elem, shift);
        // Honest absolute precision is N - 2 = 6: one digit for the von
        // Staudt pole of B_4 inside the level sum, one for the division by k.
        assert!(
            rhs.agreement_exponent(&expected) >= 6,
            "agreement {} too small",
            rhs.agreement_exponent(&expected)
        );
    }

    /// Full interpolation identity on a branch with nontrivial tame part and
    /// mixed twists: series evaluations match the Bernoulli targets at
    /// several k, to the guaranteed precision.
    #[test]
    fn series_interpolates_bernoulli_targets() {
        let w = ring(7, 9, &[2]);
        let chi = chi_8();
        let ls = build_series(&w, &chi, 0, 3, 16).unwrap();
        let n_eff = ls.n_eff();
        assert_eq!(n_eff, 4);
        for k in 1..=5 {
            let lhs = ls.lp_eval(1 - k as i64).unwrap();
            let rhs = interpolation_rhs(&w, &chi, 0, k).unwrap();
            let agree = PadicScaled::from_elem(lhs.clone()).agreement_exponent(&rhs);
            assert!(
                agree >= n_eff as i64,
                "k = {k}: lhs {lhs} vs rhs {rhs}, agreement {agree}"
            );
        }
    }

    /// The trivial tame character with an even twist recovers the classical
    /// zeta values: L_p(-1, omega^2) = (1 - p) zeta(-1) = 1/3 at p = 5.
    #[test]
    fn zeta_branch_value_at_minus_one() {
        let w = ring(5, 8, &[1]);
        let triv = character(1, 0).unwrap();
        let ls = build_series(&w, &triv, 2, 3, 8).unwrap();
        let lhs = ls.lp_eval(-1).unwrap();
        let third = w.from_rational(&BigRational::new(BigInt::from(1), BigInt::from(3))).unwrap();
        assert!(lhs.precision() >= 4);
        assert!(lhs.eq_mod(&third, lhs.precision()));
    }

    /// Raising the level only refines the coefficients: lower-level digits
    /// are reproduced exactly (empirical check of the precision ladder).
    #[test]
    fn levels_are_coherent() {
        let w = ring(7, 9, &[2]);
        let chi = chi_8();
        let lo = build_series(&w, &chi, 0, 1, 7).unwrap();
        let hi = build_series(&w, &chi, 0, 2, 7).unwrap();
        for m in 0..7 {
            let a = lo.series().coeff(m);
            let b = hi.series().coeff(m);
            assert!(
                b.eq_mod(a, a.precision()),
                "coefficient {m} disagrees below the stated precision"
            );
        }
        // And the evaluation precisions are as announced.
        assert_eq!(lo.n_eff(), 2);
        assert_eq!(hi.n_eff(), 3);
    }

    /// Bit-for-bit determinism of the whole construction.
    #[test]
    fn construction_is_deterministic() {
        let build = || {
            let w = ring(7, 8, &[2]);
            let chi = chi_8();
            let ls = build_series(&w, &chi, 0, 2, 7).unwrap();
            serde_json::to_string(&ls.descriptor()).unwrap()
        };
        assert_eq!(build(), build());
    }

    /// Descriptor round-trip preserves every coefficient and parameter.
    #[test]
    fn descriptor_round_trips() {
        let w = ring(7, 8, &[2]);
        let ls = build_series(&w, &chi_8(), 0, 2, 7).unwrap();
        let desc = ls.descriptor();
        let back = BranchSeries::from_descriptor(&desc).unwrap();
        assert_eq!(back.twist(), ls.twist());
        assert_eq!(back.regularizer(), ls.regularizer());
        assert_eq!(back.level(), ls.level());
        for m in 0..7 {
            assert_eq!(back.series().coeff(m).coeffs(), ls.series().coeff(m).coeffs());
            assert_eq!(back.series().coeff(m).precision(), ls.series().coeff(m).precision());
        }
    }
}
