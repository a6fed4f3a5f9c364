//! Exact arithmetic in truncated unramified extensions of the p-adic integers.
//!
//! A ring here is `W = (Z/p^N)[x] / (m(x))` with `m` a monic degree-`d` lift of
//! an irreducible polynomial over `F_p`, so `W` is the ring of integers of the
//! degree-`d` unramified extension of `Q_p` truncated at precision `p^N`.  The
//! lift is canonicalized so that the roots of `m` are Teichmüller
//! representatives: `m(y) = prod_{i<d} (y - theta^{p^i})` where `theta` is the
//! Teichmüller lift of a root mod `p`.  Consequently `x^{p^d} = x` holds
//! exactly and the Frobenius automorphism is literally `x -> x^p`.
//!
//! The multiplicative group of the residue field has order `q - 1 = p^d - 1`,
//! so `W` contains a primitive `m`-th root of unity for every `m | q - 1`.
//! The ring fixes one by enumerating residue-field elements in a deterministic
//! order, taking the first multiplicative generator `g`, Teichmüller-lifting
//! it, and setting `zeta_m = g^{(q-1)/m}`.  This deterministic choice is the
//! concrete embedding of prime-to-p roots of unity used by every consumer.
//!
//! Residues are stored in machine words; construction rejects parameters with
//! `p^N >= 2^63` (products are formed through 128-bit intermediates).  Every
//! element carries its own guaranteed precision exponent `prec <= N`, with
//! coefficients kept reduced mod `p^prec`; arithmetic propagates the minimum
//! of the operand precisions and divisions reduce it explicitly.  The
//! logarithm uses the branch `log p = 0`: for `x = p^v * omega(u) * <u>` it
//! returns `log <u>` via the alternating series, truncated at `K = prec * p`
//! terms, with the documented loss `max_{k <= K} v_p(k)` subtracted from the
//! reported precision.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Scalar helpers mod p^N (word-sized residues, 128-bit products).
// ---------------------------------------------------------------------------

#[inline]
pub(crate) fn addm(a: u64, b: u64, pn: u64) -> u64 {
    let s = a + b; // a, b < pn < 2^63, no overflow
    if s >= pn {
        s - pn
    } else {
        s
    }
}

#[inline]
pub(crate) fn subm(a: u64, b: u64, pn: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + pn - b
    }
}

#[inline]
pub(crate) fn mulm(a: u64, b: u64, pn: u64) -> u64 {
    ((a as u128 * b as u128) % pn as u128) as u64
}

pub(crate) fn powm(mut base: u64, mut e: u64, pn: u64) -> u64 {
    let mut acc = 1 % pn;
    base %= pn;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulm(acc, base, pn);
        }
        base = mulm(base, base, pn);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `n` (extended Euclid); `a` must be coprime to `n`.
pub(crate) fn invm(a: u64, n: u64) -> Result<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::NonUnit);
    }
    Ok(s0.rem_euclid(n as i128) as u64)
}

/// p-adic valuation of a residue, capped at `cap` (the valuation of 0).
pub(crate) fn valp(mut a: u64, p: u64, cap: u32) -> u32 {
    if a == 0 {
        return cap;
    }
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
        if v >= cap {
            return cap;
        }
    }
    v
}

pub(crate) fn checked_pow(p: u64, e: u32, limit: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p)?;
        if acc >= limit {
            return None;
        }
    }
    Some(acc)
}

fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut f = 3;
    while f * f <= p {
        if p % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order of `a` modulo `m` (requires gcd(a, m) = 1; m >= 1).
pub(crate) fn mult_order(a: u64, m: u64) -> u64 {
    if m <= 1 {
        return 1;
    }
    let mut cur = a % m;
    let mut k = 1;
    while cur != 1 {
        cur = cur * a % m;
        k += 1;
        debug_assert!(k <= m);
    }
    k
}

// ---------------------------------------------------------------------------
// Dense polynomial arithmetic modulo a monic modulus, coefficients mod pn.
// ---------------------------------------------------------------------------

/// Multiply two length-`d` coefficient vectors and reduce by the monic
/// `modulus` (length `d + 1`), all modulo `pn`.
fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], pn: u64) -> Vec<u64> {
    let d = modulus.len() - 1;
    let mut t = vec![0u64; 2 * d.max(1) - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0 {
                t[i + j] = addm(t[i + j], mulm(ai, bj, pn), pn);
            }
        }
    }
    for i in (d..t.len()).rev() {
        let c = t[i];
        if c != 0 {
            t[i] = 0;
            for k in 0..d {
                if modulus[k] != 0 {
                    t[i - d + k] = subm(t[i - d + k], mulm(c, modulus[k], pn), pn);
                }
            }
        }
    }
    t.truncate(d);
    t
}

fn poly_powmod(base: &[u64], mut e: u64, modulus: &[u64], pn: u64) -> Vec<u64> {
    let d = modulus.len() - 1;
    let mut acc = vec![0u64; d];
    acc[0] = 1 % pn;
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, modulus, pn);
        }
        b = poly_mulmod(&b, &b, modulus, pn);
        e >>= 1;
    }
    acc
}

/// The class of `x` in `(Z/pn)[x]/(modulus)` as a coefficient vector.
fn x_class(modulus: &[u64], pn: u64) -> Vec<u64> {
    let d = modulus.len() - 1;
    if d == 1 {
        vec![subm(0, modulus[0], pn)]
    } else {
        let mut v = vec![0u64; d];
        v[1] = 1;
        v
    }
}

// --- F_p[x] helpers for the irreducibility test (raw, no fixed modulus) ---

fn fp_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = invm(b[db], p).expect("nonzero leading coefficient");
    while r.len() - 1 >= db && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let c = mulm(r[dr], lead_inv, p);
        for k in 0..=db {
            r[dr - db + k] = subm(r[dr - db + k], mulm(c, b[k], p), p);
        }
        fp_trim(&mut r);
        if r.len() - 1 < db || (r.len() == 1 && r[0] == 0) {
            break;
        }
    }
    r
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility over `F_p` of a monic polynomial, by the distinct-degree
/// criterion: `x^{p^d} = x (mod m)` and `gcd(x^{p^{d/r}} - x, m) = 1` for
/// every prime `r | d`.
fn fp_is_irreducible(m: &[u64], p: u64) -> bool {
    let d = m.len() - 1;
    if d == 1 {
        return true;
    }
    let x = x_class(m, p);
    // chain[k] = x^{p^k} mod m
    let mut chain = vec![x.clone()];
    for k in 1..=d {
        let prev = chain[k - 1].clone();
        chain.push(poly_powmod(&prev, p, m, p));
    }
    if chain[d] != x {
        return false;
    }
    for r in prime_factors(d as u64) {
        let idx = d / r as usize;
        let mut h: Vec<u64> = chain[idx]
            .iter()
            .zip(x.iter())
            .map(|(&a, &b)| subm(a, b, p))
            .collect();
        fp_trim(&mut h);
        if h.len() == 1 && h[0] == 0 {
            return false; // x^{p^{d/r}} = x already: m splits into smaller factors
        }
        let g = fp_gcd(m, &h, p);
        if g.len() - 1 != 0 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Ring construction.
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub(crate) struct RingInner {
    pub(crate) p: u64,
    pub(crate) prec: u32,
    pub(crate) pn: u64,
    pub(crate) d: usize,
    /// Monic modulus, ascending degree, length d + 1, coefficients mod p^N.
    pub(crate) modulus: Vec<u64>,
    pub(crate) orders: Vec<u64>,
    q: u64,
    /// Powers `(x^p)^i`, i < d: Frobenius images of the monomial basis.
    frob_pows: Vec<Vec<u64>>,
    /// Powers `(x^{p^{d-1}})^i`, i < d: inverse-Frobenius images.
    frob_inv_pows: Vec<Vec<u64>>,
    /// Teichmüller lift of the deterministic residue-field generator.
    gen_teich: Vec<u64>,
    salt: u64,
}

/// A truncated unramified extension `(Z/p^N)[x]/(m(x))`; cheap to clone.
#[derive(Clone, Debug)]
pub struct UnramifiedWitnessRing(pub(crate) Arc<RingInner>);

impl PartialEq for UnramifiedWitnessRing {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other)
    }
}
impl Eq for UnramifiedWitnessRing {}

fn build_seed(p: u64, d: u64, salt: u64) -> u64 {
    // Stable mixing (splitmix64-style) so builds are reproducible everywhere.
    let mut z = p
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(d.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(salt.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl UnramifiedWitnessRing {
    /// Build the ring of precision `p^n` certifying primitive `m`-th roots of
    /// unity for every `m` in `orders`.  The residue degree is
    /// `d = lcm_m ord_m(p)`.  Deterministic in its arguments.
    pub fn build(p: u64, n: u32, orders: &[u64]) -> Result<Self> {
        Self::build_with_salt(p, n, orders, 0)
    }

    /// Like [`build`](Self::build) but with a seed salt, selecting a different
    /// irreducible modulus (used to test invariance of reported quantities
    /// under the choice of presentation).
    pub fn build_with_salt(p: u64, n: u32, orders: &[u64], salt: u64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if n < 1 {
            return Err(Error::PrecisionCap { p, n });
        }
        let mut ords: Vec<u64> = orders.to_vec();
        ords.sort_unstable();
        ords.dedup();
        for &m in &ords {
            if m == 0 || m % p == 0 {
                return Err(Error::BadRootOrder { m, p });
            }
        }
        let mut d: u64 = 1;
        for &m in &ords {
            let o = mult_order(p % m.max(1), m);
            d = num_integer::lcm(d, o);
        }
        let pn = checked_pow(p, n, 1 << 63).ok_or(Error::PrecisionCap { p, n })?;
        let q = checked_pow(p, d as u32, 1 << 62).ok_or(Error::DegreeCap { p, d })?;
        let d = d as usize;

        // Find an irreducible monic degree-d polynomial mod p by seeded
        // random sampling.
        let mut rng = ChaCha20Rng::seed_from_u64(build_seed(p, d as u64, salt));
        let m0: Vec<u64> = loop {
            let mut cand: Vec<u64> = (0..d).map(|_| rng.gen_range(0..p)).collect();
            cand.push(1);
            if fp_is_irreducible(&cand, p) {
                break cand;
            }
        };

        // Canonicalize: replace m0 by the lift whose roots are Teichmüller
        // representatives, computed inside the naive-lift quotient.
        let theta = teich_iterate(&x_class(&m0, pn), &m0, pn, q, n);
        let mut roots = vec![theta.clone()];
        for i in 1..d {
            let prev = roots[i - 1].clone();
            roots.push(poly_powmod(&prev, p, &m0, pn));
        }
        // prod(y - root_i), coefficients in the naive quotient ring.
        let mut prod: Vec<Vec<u64>> = vec![vec![0; d]];
        prod[0][0] = 1;
        for r in &roots {
            let mut next: Vec<Vec<u64>> = vec![vec![0u64; d]; prod.len() + 1];
            for (k, c) in prod.iter().enumerate() {
                // y * c contributes to next[k + 1]
                for (t, &v) in c.iter().enumerate() {
                    next[k + 1][t] = addm(next[k + 1][t], v, pn);
                }
                // -r * c contributes to next[k]
                let rc = poly_mulmod(r, c, &m0, pn);
                for (t, &v) in rc.iter().enumerate() {
                    next[k][t] = subm(next[k][t], v, pn);
                }
            }
            prod = next;
        }
        let mut modulus = Vec::with_capacity(d + 1);
        for c in &prod {
            if c[1..].iter().any(|&v| v != 0) {
                return Err(Error::Internal(
                    "canonical modulus coefficient not in the base ring".into(),
                ));
            }
            modulus.push(c[0]);
        }
        debug_assert_eq!(modulus[d], 1);
        // Same residue polynomial as the sampled one.
        debug_assert!(modulus.iter().zip(m0.iter()).all(|(&a, &b)| a % p == b % p));

        // In the canonical quotient, x is its own Teichmüller lift.
        let x = x_class(&modulus, pn);
        if poly_powmod(&x, q, &modulus, pn) != x {
            return Err(Error::Internal("x^{p^d} != x after canonicalization".into()));
        }

        // Frobenius tables.
        let xp = poly_powmod(&x, p, &modulus, pn);
        let mut frob_pows = vec![vec![0u64; d]; d];
        frob_pows[0][0] = 1;
        for i in 1..d {
            let prev = frob_pows[i - 1].clone();
            frob_pows[i] = poly_mulmod(&prev, &xp, &modulus, pn);
        }
        let mut xpd1 = x.clone();
        for _ in 0..(d - 1).max(0) {
            xpd1 = poly_powmod(&xpd1, p, &modulus, pn);
        }
        let mut frob_inv_pows = vec![vec![0u64; d]; d];
        frob_inv_pows[0][0] = 1;
        for i in 1..d {
            let prev = frob_inv_pows[i - 1].clone();
            frob_inv_pows[i] = poly_mulmod(&prev, &xpd1, &modulus, pn);
        }

        // Deterministic residue-field generator: first element of F_q^* with
        // full multiplicative order, in little-endian base-p enumeration.
        let m_bar: Vec<u64> = modulus.iter().map(|&c| c % p).collect();
        let q1 = q - 1;
        let q1_primes = prime_factors(q1);
        let one_bar = {
            let mut v = vec![0u64; d];
            v[0] = 1;
            v
        };
        let mut gen_res = None;
        for idx in 1..q {
            let mut digits = vec![0u64; d];
            let mut t = idx;
            for slot in digits.iter_mut() {
                *slot = t % p;
                t /= p;
            }
            let ok = q1_primes
                .iter()
                .all(|&r| poly_powmod(&digits, q1 / r, &m_bar, p) != one_bar);
            if ok {
                gen_res = Some(digits);
                break;
            }
        }
        let gen_res = gen_res.ok_or_else(|| Error::Internal("no generator found".into()))?;
        let gen_teich = teich_iterate(&gen_res, &modulus, pn, q, n);

        Ok(UnramifiedWitnessRing(Arc::new(RingInner {
            p,
            prec: n,
            pn,
            d,
            modulus,
            orders: ords,
            q,
            frob_pows,
            frob_inv_pows,
            gen_teich,
            salt,
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }
    /// Ring precision exponent `N`.
    pub fn precision(&self) -> u32 {
        self.0.prec
    }
    /// `p^N`.
    pub fn pn(&self) -> u64 {
        self.0.pn
    }
    /// Residue degree `d`.
    pub fn degree(&self) -> usize {
        self.0.d
    }
    /// Certified root-of-unity orders this ring was built for.
    pub fn orders(&self) -> &[u64] {
        &self.0.orders
    }
    /// Salt used when the modulus was generated; rings sharing `(p, orders,
    /// salt)` have coherent moduli across precisions.
    pub fn salt(&self) -> u64 {
        self.0.salt
    }
    /// Monic modulus coefficients (ascending degree, length `d + 1`).
    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub(crate) fn same_ring(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.prec == other.0.prec
                && self.0.modulus == other.0.modulus)
    }

    fn check_same(&self, other: &Self) {
        assert!(
            self.same_ring(other),
            "operands belong to different rings (p^N = {}^{} vs {}^{})",
            self.0.p,
            self.0.prec,
            other.0.p,
            other.0.prec
        );
    }

    pub fn zero(&self) -> PadicElement {
        PadicElement {
            ring: self.clone(),
            coeffs: vec![0; self.0.d],
            prec: self.0.prec,
        }
    }

    pub fn one(&self) -> PadicElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> PadicElement {
        let mut c = vec![0; self.0.d];
        c[0] = v % self.0.pn;
        PadicElement {
            ring: self.clone(),
            coeffs: c,
            prec: self.0.prec,
        }
    }

    pub fn from_i64(&self, v: i64) -> PadicElement {
        let r = (v as i128).rem_euclid(self.0.pn as i128) as u64;
        self.from_u64(r)
    }

    pub fn from_bigint(&self, v: &BigInt) -> PadicElement {
        let m = BigInt::from(self.0.pn);
        let r = ((v % &m) + &m) % &m;
        let (_, digits) = r.to_u64_digits();
        self.from_u64(digits.first().copied().unwrap_or(0))
    }

    /// Embed an exact rational with denominator prime to `p`.
    pub fn from_rational(&self, r: &BigRational) -> Result<PadicElement> {
        let (e, shift) = self.from_rational_scaled(r);
        if shift > 0 {
            return Err(Error::DenominatorNotUnit);
        }
        Ok(e)
    }

    /// Embed an exact rational as `(element, shift)` with value
    /// `element / p^shift`, where `p^shift` is the p-part of the denominator.
    pub fn from_rational_scaled(&self, r: &BigRational) -> (PadicElement, u32) {
        let p_big = BigInt::from(self.0.p);
        let mut den = r.denom().abs();
        let mut shift = 0u32;
        while (&den % &p_big).is_zero() {
            den /= &p_big;
            shift += 1;
        }
        let mut num = self.from_bigint(r.numer());
        if r.denom().sign() == Sign::Minus {
            num = num.neg();
        }
        let den_inv = self
            .from_bigint(&den)
            .inverse()
            .expect("denominator unit after stripping p-part");
        (num.mul(&den_inv), shift)
    }

    /// The class of `x` (a Teichmüller element of full residue-field order
    /// only when `d` is the order of its residue; mostly useful in tests).
    pub fn x_element(&self) -> PadicElement {
        PadicElement {
            ring: self.clone(),
            coeffs: x_class(&self.0.modulus, self.0.pn),
            prec: self.0.prec,
        }
    }

    /// Teichmüller lift of the deterministic residue-field generator.
    pub fn multiplicative_generator(&self) -> PadicElement {
        PadicElement {
            ring: self.clone(),
            coeffs: self.0.gen_teich.clone(),
            prec: self.0.prec,
        }
    }

    /// The deterministic primitive `m`-th root of unity, for any `m | p^d - 1`.
    pub fn zeta(&self, m: u64) -> Result<PadicElement> {
        let q1 = self.0.q - 1;
        if m == 0 || q1 % m != 0 {
            return Err(Error::RootOrderNotContained { m, q1 });
        }
        Ok(self.multiplicative_generator().pow_u64(q1 / m))
    }

    pub fn from_coeffs(&self, coeffs: Vec<u64>, prec: u32) -> Result<PadicElement> {
        if coeffs.len() != self.0.d || prec > self.0.prec {
            return Err(Error::Internal("bad coefficient vector".into()));
        }
        let mut e = PadicElement {
            ring: self.clone(),
            coeffs,
            prec: self.0.prec,
        };
        e.reduce_to(prec);
        Ok(e)
    }

    pub fn descriptor(&self) -> RingDescriptor {
        RingDescriptor {
            p: self.0.p.to_string(),
            n: self.0.prec.to_string(),
            d: self.0.d.to_string(),
            modulus: self.0.modulus.iter().map(|c| c.to_string()).collect(),
            orders: self.0.orders.iter().map(|m| m.to_string()).collect(),
            salt: self.0.salt.to_string(),
        }
    }
}

/// Iterate `z -> z^q` to the Teichmüller fixed point (exact at precision n).
fn teich_iterate(z0: &[u64], modulus: &[u64], pn: u64, q: u64, n: u32) -> Vec<u64> {
    let mut z = z0.to_vec();
    for _ in 0..=(n + 1) {
        let nz = poly_powmod(&z, q, modulus, pn);
        if nz == z {
            return z;
        }
        z = nz;
    }
    // Convergence is guaranteed in <= n steps; reaching here is a bug.
    panic!("Teichmüller iteration failed to stabilize");
}

// ---------------------------------------------------------------------------
// Elements.
// ---------------------------------------------------------------------------

/// An element of an [`UnramifiedWitnessRing`], reduced mod `p^prec`.
#[derive(Clone)]
pub struct PadicElement {
    ring: UnramifiedWitnessRing,
    coeffs: Vec<u64>,
    prec: u32,
}

impl PadicElement {
    pub fn ring(&self) -> &UnramifiedWitnessRing {
        &self.ring
    }
    /// Guaranteed precision exponent of this value.
    pub fn precision(&self) -> u32 {
        self.prec
    }
    /// Coefficients on the monomial basis, reduced mod `p^prec`.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    fn pe(&self) -> u64 {
        // p^prec
        checked_pow(self.ring.0.p, self.prec, u64::MAX).expect("prec <= N")
    }

    fn reduce_to(&mut self, prec: u32) {
        let prec = prec.min(self.ring.0.prec);
        self.prec = prec;
        let pe = self.pe();
        for c in &mut self.coeffs {
            *c %= pe;
        }
    }

    /// A copy truncated to precision `e` (coefficients reduced mod `p^e`).
    pub fn truncated(&self, e: u32) -> PadicElement {
        let mut out = self.clone();
        out.reduce_to(e.min(self.prec));
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Minimum p-adic valuation over coefficients; `None` when the element is
    /// zero to its stated precision.
    pub fn valuation(&self) -> Option<u32> {
        let p = self.ring.0.p;
        let mut best: Option<u32> = None;
        for &c in &self.coeffs {
            if c != 0 {
                let v = valp(c, p, self.prec);
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best
    }

    pub fn neg(&self) -> PadicElement {
        let pe = self.pe();
        PadicElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|&c| subm(0, c, pe)).collect(),
            prec: self.prec,
        }
    }

    fn bin(&self, other: &PadicElement, f: impl Fn(u64, u64, u64) -> u64) -> PadicElement {
        self.ring.check_same(&other.ring);
        let prec = self.prec.min(other.prec);
        let pe = checked_pow(self.ring.0.p, prec, u64::MAX).unwrap();
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(&a, &b)| f(a % pe, b % pe, pe))
            .collect();
        PadicElement {
            ring: self.ring.clone(),
            coeffs,
            prec,
        }
    }

    pub fn add(&self, other: &PadicElement) -> PadicElement {
        self.bin(other, addm)
    }

    pub fn sub(&self, other: &PadicElement) -> PadicElement {
        self.bin(other, subm)
    }

    pub fn mul(&self, other: &PadicElement) -> PadicElement {
        self.ring.check_same(&other.ring);
        let prec = self.prec.min(other.prec);
        let inner = &self.ring.0;
        let mut out = PadicElement {
            ring: self.ring.clone(),
            coeffs: poly_mulmod(&self.coeffs, &other.coeffs, &inner.modulus, inner.pn),
            prec: inner.prec,
        };
        out.reduce_to(prec);
        out
    }

    pub fn mul_scalar(&self, s: u64) -> PadicElement {
        let pe = self.pe();
        PadicElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|&c| mulm(c, s % pe, pe)).collect(),
            prec: self.prec,
        }
    }

    pub fn mul_scalar_i64(&self, s: i64) -> PadicElement {
        let pe = self.pe();
        let r = (s as i128).rem_euclid(pe as i128) as u64;
        self.mul_scalar(r)
    }

    pub fn pow_u64(&self, mut e: u64) -> PadicElement {
        let mut acc = self.ring.one().truncated(self.prec);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_biguint(&self, e: &BigUint) -> PadicElement {
        let mut acc = self.ring.one().truncated(self.prec);
        let mut base = self.clone();
        for i in 0..e.bits() {
            if e.bit(i) {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
        }
        acc
    }

    /// Multiplicative inverse of a unit: residue-field inverse followed by
    /// Newton lifting (no precision loss).
    pub fn inverse(&self) -> Result<PadicElement> {
        if self.prec == 0 {
            return Err(Error::NoPrecision);
        }
        if self.valuation() != Some(0) {
            return Err(Error::NonUnit);
        }
        let inner = &self.ring.0;
        let (p, pn) = (inner.p, inner.pn);
        let res: Vec<u64> = self.coeffs.iter().map(|&c| c % p).collect();
        let m_bar: Vec<u64> = inner.modulus.iter().map(|&c| c % p).collect();
        // Inverse in F_q via z^(q - 2).
        let mut y = poly_powmod(&res, inner.q - 2, &m_bar, p);
        y.resize(inner.d, 0);
        // Newton: y <- y (2 - a y), doubling correct digits each step.
        let steps = 64 - u64::from(inner.prec).leading_zeros() + 1;
        let two = {
            let mut t = vec![0u64; inner.d];
            t[0] = 2 % pn;
            t
        };
        for _ in 0..steps {
            let ay = poly_mulmod(&self.coeffs, &y, &inner.modulus, pn);
            let corr: Vec<u64> = two
                .iter()
                .zip(ay.iter())
                .map(|(&a, &b)| subm(a, b, pn))
                .collect();
            y = poly_mulmod(&y, &corr, &inner.modulus, pn);
        }
        let mut out = PadicElement {
            ring: self.ring.clone(),
            coeffs: y,
            prec: inner.prec,
        };
        out.reduce_to(self.prec);
        Ok(out)
    }

    /// Exact division by `p^k`; fails unless every coefficient is divisible.
    pub fn rescale_down(&self, k: u32) -> Result<PadicElement> {
        if k == 0 {
            return Ok(self.clone());
        }
        if self.prec < k {
            return Err(Error::NoPrecision);
        }
        let pk = checked_pow(self.ring.0.p, k, u64::MAX).unwrap();
        if self.coeffs.iter().any(|&c| c % pk != 0) {
            return Err(Error::InexactRescale(k));
        }
        Ok(PadicElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|&c| c / pk).collect(),
            prec: self.prec - k,
        })
    }

    /// Multiplication by `p^k` (precision grows, capped at `N`).
    pub fn mul_p_pow(&self, k: u32) -> PadicElement {
        let inner = &self.ring.0;
        let prec = (self.prec + k).min(inner.prec);
        let pe = checked_pow(inner.p, prec, u64::MAX).unwrap();
        let pk = checked_pow(inner.p, k, u64::MAX).unwrap();
        PadicElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|&c| mulm(c, pk, pe)).collect(),
            prec,
        }
    }

    /// Exact division by an integer `k = p^e * k'`: multiplies by `k'^{-1}`
    /// and rescales by `p^e`, reducing precision by `e`.
    pub fn div_exact_u64(&self, k: u64) -> Result<PadicElement> {
        assert!(k > 0);
        let p = self.ring.0.p;
        let e = valp(k, p, 63);
        let unit = k / checked_pow(p, e, u64::MAX).unwrap();
        let inv = invm(unit, self.pe().max(2))?;
        let scaled = self.mul_scalar(inv);
        scaled.rescale_down(e)
    }

    /// Frobenius lift: the ring automorphism with `x -> x^p`; order `d`,
    /// identity on the base, `zeta_m -> zeta_m^p`.
    pub fn frobenius(&self) -> PadicElement {
        self.frob_with(&self.ring.0.frob_pows)
    }

    /// Inverse Frobenius (`frobenius` applied `d - 1` times).
    pub fn frobenius_inv(&self) -> PadicElement {
        self.frob_with(&self.ring.0.frob_inv_pows)
    }

    fn frob_with(&self, pows: &[Vec<u64>]) -> PadicElement {
        let inner = &self.ring.0;
        let mut acc = vec![0u64; inner.d];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                for (t, &b) in pows[i].iter().enumerate() {
                    acc[t] = addm(acc[t], mulm(c, b, inner.pn), inner.pn);
                }
            }
        }
        let mut out = PadicElement {
            ring: self.ring.clone(),
            coeffs: acc,
            prec: inner.prec,
        };
        out.reduce_to(self.prec);
        out
    }

    /// The Teichmüller representative of a unit: the unique `(p^d - 1)`-st
    /// root of unity congruent to it mod `p`, by iterating `y -> y^{p^d}`.
    /// Full ring precision (depends only on the residue).
    pub fn teichmuller(&self) -> Result<PadicElement> {
        if self.prec == 0 {
            return Err(Error::NoPrecision);
        }
        if self.valuation() != Some(0) {
            return Err(Error::NonUnit);
        }
        let inner = &self.ring.0;
        let t = teich_iterate(&self.coeffs, &inner.modulus, inner.pn, inner.q, inner.prec);
        Ok(PadicElement {
            ring: self.ring.clone(),
            coeffs: t,
            prec: inner.prec,
        })
    }

    /// Iwasawa logarithm with the branch `log p = 0`: writes
    /// `x = p^v * omega(u) * <u>` and returns `log <u>` by the alternating
    /// series with `K = prec * p` terms.  Reported precision drops by
    /// `max_{k <= K} v_p(k)` relative to the unit part's precision.
    pub fn iwasawa_log(&self) -> Result<PadicElement> {
        let v = match self.valuation() {
            None => return Err(Error::LogOfZero),
            Some(v) => v,
        };
        let unit = self.rescale_down(v)?;
        if unit.prec == 0 {
            // Degenerate: nothing survives (e.g. N = 1 rings).
            let mut z = self.ring.zero();
            z.reduce_to(0);
            return Ok(z);
        }
        let t_inv = unit.teichmuller()?.inverse()?;
        let one_unit = unit.mul(&t_inv); // congruent to 1 mod p
        let w = one_unit.sub(&self.ring.one().truncated(one_unit.prec));
        debug_assert!(w.is_zero() || w.valuation().unwrap_or(0) >= 1);
        // All kmax terms always run, so the reported loss is the uniform
        // max_{k <= kmax} v_p(k) regardless of how fast the series dies.
        let kmax = u64::from(one_unit.prec) * self.ring.0.p;
        let mut sum = self.ring.zero().truncated(one_unit.prec);
        let mut wpow = self.ring.one().truncated(one_unit.prec);
        for k in 1..=kmax {
            wpow = wpow.mul(&w);
            let term = wpow.div_exact_u64(k)?;
            if k % 2 == 1 {
                sum = sum.add(&term);
            } else {
                sum = sum.sub(&term);
            }
        }
        Ok(sum)
    }

    /// Largest `e <= min(precisions)` with `self = other (mod p^e)`.
    pub fn agreement_exponent(&self, other: &PadicElement) -> u32 {
        self.ring.check_same(&other.ring);
        let cap = self.prec.min(other.prec);
        let d = self.sub(other);
        match d.valuation() {
            None => cap,
            Some(v) => v.min(cap),
        }
    }

    /// Equality mod `p^e` (requires both to carry at least `e` digits).
    pub fn eq_mod(&self, other: &PadicElement, e: u32) -> bool {
        self.prec >= e && other.prec >= e && self.agreement_exponent(other) >= e
    }

    pub fn descriptor(&self) -> ElementDescriptor {
        ElementDescriptor {
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
            prec: self.prec.to_string(),
        }
    }

    pub fn from_descriptor(ring: &UnramifiedWitnessRing, desc: &ElementDescriptor) -> Result<Self> {
        let prec: u32 = desc
            .prec
            .parse()
            .map_err(|_| Error::Internal("bad precision in element descriptor".into()))?;
        let coeffs: std::result::Result<Vec<u64>, _> =
            desc.coeffs.iter().map(|s| s.parse::<u64>()).collect();
        let coeffs = coeffs.map_err(|_| Error::Internal("bad digits in element descriptor".into()))?;
        ring.from_coeffs(coeffs, prec)
    }
}

impl PartialEq for PadicElement {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same_ring(&other.ring) && self.prec == other.prec && self.coeffs == other.coeffs
    }
}
impl Eq for PadicElement {}

impl fmt::Debug for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " (mod {}^{})", self.ring.0.p, self.prec)
    }
}

impl std::ops::Add for &PadicElement {
    type Output = PadicElement;
    fn add(self, rhs: &PadicElement) -> PadicElement {
        PadicElement::add(self, rhs)
    }
}
impl std::ops::Sub for &PadicElement {
    type Output = PadicElement;
    fn sub(self, rhs: &PadicElement) -> PadicElement {
        PadicElement::sub(self, rhs)
    }
}
impl std::ops::Mul for &PadicElement {
    type Output = PadicElement;
    fn mul(self, rhs: &PadicElement) -> PadicElement {
        PadicElement::mul(self, rhs)
    }
}
impl std::ops::Neg for &PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        PadicElement::neg(self)
    }
}

// ---------------------------------------------------------------------------
// Scaled values: element / p^shift, for quantities of negative valuation or
// intermediate results with denominators.
// ---------------------------------------------------------------------------

/// A ring element divided by a power of `p`: `value = num / p^shift`.
///
/// The pair tracks absolute precision honestly: `num` known mod `p^e` makes
/// the value known with error `p^{e - shift}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PadicScaled {
    num: PadicElement,
    shift: u32,
}

impl PadicScaled {
    pub fn new(num: PadicElement, shift: u32) -> Self {
        PadicScaled { num, shift }
    }
    pub fn from_elem(num: PadicElement) -> Self {
        PadicScaled { num, shift: 0 }
    }
    pub fn num(&self) -> &PadicElement {
        &self.num
    }
    pub fn shift(&self) -> u32 {
        self.shift
    }
    /// Absolute precision exponent: value known mod `p^{abs_prec}` (may be
    /// negative when the denominator dominates).
    pub fn abs_prec(&self) -> i64 {
        i64::from(self.num.prec) - i64::from(self.shift)
    }

    fn aligned(&self, other: &PadicScaled) -> (PadicElement, PadicElement, u32) {
        let s = self.shift.max(other.shift);
        (
            self.num.mul_p_pow(s - self.shift),
            other.num.mul_p_pow(s - other.shift),
            s,
        )
    }

    pub fn add(&self, other: &PadicScaled) -> PadicScaled {
        let (a, b, s) = self.aligned(other);
        PadicScaled {
            num: a.add(&b),
            shift: s,
        }
    }
    pub fn sub(&self, other: &PadicScaled) -> PadicScaled {
        let (a, b, s) = self.aligned(other);
        PadicScaled {
            num: a.sub(&b),
            shift: s,
        }
    }
    pub fn neg(&self) -> PadicScaled {
        PadicScaled {
            num: self.num.neg(),
            shift: self.shift,
        }
    }
    pub fn mul(&self, other: &PadicScaled) -> PadicScaled {
        PadicScaled {
            num: self.num.mul(&other.num),
            shift: self.shift + other.shift,
        }
    }
    pub fn mul_elem(&self, other: &PadicElement) -> PadicScaled {
        PadicScaled {
            num: self.num.mul(other),
            shift: self.shift,
        }
    }

    /// Exact division by a nonzero integer `k = unit * p^e`: multiply by the
    /// unit inverse and add `e` to the shift.
    pub fn div_exact_u64(&self, k: u64) -> Result<PadicScaled> {
        if k == 0 {
            return Err(Error::NonUnit);
        }
        let ring = self.num.ring();
        let e = valp(k, ring.p(), 63);
        let unit = k / checked_pow(ring.p(), e, u64::MAX).expect("p^e divides k");
        let inv = ring.from_u64(unit).inverse()?;
        Ok(PadicScaled {
            num: self.num.mul(&inv),
            shift: self.shift + e,
        })
    }

    /// Remove the shift when the value is actually integral.
    pub fn unscale(&self) -> Result<PadicElement> {
        self.num.rescale_down(self.shift)
    }

    /// Reduce the shift as far as exact divisibility allows.
    pub fn normalized(&self) -> PadicScaled {
        let mut out = self.clone();
        while out.shift > 0 {
            match out.num.rescale_down(1) {
                Ok(n) => {
                    out = PadicScaled {
                        num: n,
                        shift: out.shift - 1,
                    }
                }
                Err(_) => break,
            }
        }
        out
    }

    /// Largest absolute exponent `e <= min(abs precisions)` with
    /// `self = other (mod p^e)`; exponents are absolute (can be negative).
    pub fn agreement_exponent(&self, other: &PadicScaled) -> i64 {
        let (a, b, s) = self.aligned(other);
        i64::from(a.agreement_exponent(&b)) - i64::from(s)
    }
}

impl fmt::Display for PadicScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shift == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "p^-{} * ({})", self.shift, self.num)
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization descriptors (all integers as decimal strings).
// ---------------------------------------------------------------------------

/// JSON-facing description of a ring.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RingDescriptor {
    pub p: String,
    #[serde(rename = "N")]
    pub n: String,
    pub d: String,
    pub modulus: Vec<String>,
    pub orders: Vec<String>,
    #[serde(default = "zero_string")]
    pub salt: String,
}

fn zero_string() -> String {
    "0".into()
}

impl RingDescriptor {
    /// Rebuild the ring this descriptor came from (deterministic).
    pub fn build(&self) -> Result<UnramifiedWitnessRing> {
        let p: u64 = self.p.parse().map_err(|_| Error::Internal("bad p".into()))?;
        let n: u32 = self.n.parse().map_err(|_| Error::Internal("bad N".into()))?;
        let orders: std::result::Result<Vec<u64>, _> =
            self.orders.iter().map(|s| s.parse::<u64>()).collect();
        let salt: u64 = self.salt.parse().unwrap_or(0);
        let ring = UnramifiedWitnessRing::build_with_salt(
            p,
            n,
            &orders.map_err(|_| Error::Internal("bad orders".into()))?,
            salt,
        )?;
        // The modulus is derived deterministically; verify it matches.
        let stored: Vec<String> = ring.0.modulus.iter().map(|c| c.to_string()).collect();
        if stored != self.modulus {
            return Err(Error::Internal(
                "ring descriptor does not match its deterministic rebuild".into(),
            ));
        }
        Ok(ring)
    }
}

/// JSON-facing description of an element.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ElementDescriptor {
    pub coeffs: Vec<String>,
    pub prec: String,
}
