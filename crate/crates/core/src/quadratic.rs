//! Imaginary-quadratic p-units, the L-invariant, and the Ferrero–Greenberg
//! derivative formula.
//!
//! An odd quadratic character `chi` corresponds to a negative fundamental
//! discriminant `disc = -D`; for a split odd prime (`chi(p) = 1`) the field
//! `L = Q(sqrt(-D))` has two primes `P`, `P-bar` above `p`.  With `h` the
//! class number, `P^h` is principal, generated by a half-integer element
//!
//! ```text
//!     x = (a + b sqrt(-D)) / 2 ,      a^2 + D b^2 = 4 p^h ,
//! ```
//!
//! found by bounded norm-form search ([`find_p_unit`]).  Embed `L` into
//! `Q_p` through the Hensel square root of `disc` under which `v_p(x) = h`.
//! The L-invariant of the pair `(chi, p)` is the scaled logarithm of the
//! `chi`-isotypic component `z = x^{(1-sigma)/2}`, i.e. a square root of
//! `x / sigma(x)`.  Its valuation is `h/2`, while its logarithm equals that
//! of `x` itself: the conjugate has opposite logarithm, because the norm
//! `x * sigma(x) = p^h` vanishes under the `log p = 0` branch.  Hence
//!
//! ```text
//!     L-inv := log_p(z) / v_p(z)  =  2 log_p(x) / h ,
//! ```
//!
//! independent of the choices: a different generator of `P^h` differs by a
//! torsion unit (killed by `log_p`), and conjugating both `x` and the
//! embedding fixes the value outright.
//!
//! The Ferrero–Greenberg theorem evaluates the derivative of the
//! Kubota–Leopoldt function on the `chi^{-1} omega` branch at its
//! exceptional zero `s = 0`:
//!
//! ```text
//!     (d/ds) L_p(s, chi^{-1} omega) |_{s=0}  =  -(L-inv) * L(0, chi^{-1}) .
//! ```
//!
//! [`ferrero_greenberg_check`] computes the two sides by the two fully
//! independent pipelines — the branch series built from Stickelberger
//! elements on the left, the norm-form generator and its logarithm on the
//! right — and reports their agreement exponent.

use std::fmt;

use crate::dirichlet::{characters_mod, DirichletCharacter};
use crate::error::{Error, Result};
use crate::iwasawa::build_series;
use crate::ring::{PadicElement, UnramifiedWitnessRing};

/// Whether `disc` is a negative fundamental discriminant: `disc = 1 mod 4`
/// squarefree, or `disc = 4m` with `m = 2, 3 mod 4` squarefree.
pub fn is_fundamental(disc: i64) -> bool {
    if disc >= 0 {
        return false;
    }
    match disc.rem_euclid(4) {
        1 => is_squarefree(disc.unsigned_abs()),
        0 => {
            let m = disc / 4;
            let r = m.rem_euclid(4);
            (r == 2 || r == 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

fn is_squarefree(n: u64) -> bool {
    let mut m = n;
    let mut f = 2;
    while f * f <= m {
        if m % f == 0 {
            m /= f;
            if m % f == 0 {
                return false;
            }
        }
        f += 1;
    }
    true
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

/// The odd primitive quadratic character of conductor `|disc|` attached to
/// the negative fundamental discriminant `disc` (the Kronecker symbol
/// `(disc / .)`).  Unique: the primitive quadratic characters mod `|disc|`
/// correspond to the fundamental discriminants of that absolute value, and
/// parity separates the two signs.
pub fn quadratic_character(disc: i64) -> Result<DirichletCharacter> {
    if !is_fundamental(disc) {
        return Err(Error::NotFundamental(disc));
    }
    let f = disc.unsigned_abs();
    for chi in characters_mod(f) {
        if chi.order() == 2 && chi.is_primitive() && chi.is_odd() {
            return Ok(chi);
        }
    }
    Err(Error::Internal(format!(
        "no odd primitive quadratic character mod {f}"
    )))
}

/// The class number `h(disc)` by exact counting of reduced primitive binary
/// quadratic forms `(a, b, c)`, `b^2 - 4ac = disc`, `|b| <= a <= c`, with
/// `b >= 0` whenever `|b| = a` or `a = c`.
pub fn class_number(disc: i64) -> Result<u64> {
    if !is_fundamental(disc) {
        return Err(Error::NotFundamental(disc));
    }
    let d = disc.unsigned_abs();
    let mut h = 0u64;
    let mut b = d % 2;
    while 3 * b * b <= d {
        let n = (b * b + d) / 4;
        let mut a = b.max(1);
        while a * a <= n {
            if n % a == 0 {
                let c = n / a;
                if gcd(gcd(a, b), c) == 1 {
                    h += if b == 0 || a == b || a == c { 1 } else { 2 };
                }
            }
            a += 1;
        }
        b += 2;
    }
    Ok(h)
}

/// `chi(p)` for a quadratic character as an integer: `1` (split), `-1`
/// (inert), `0` (ramified).
fn split_value(chi: &DirichletCharacter, p: u64) -> i64 {
    match chi.value_exponent(p) {
        None => 0,
        Some(0) => 1,
        Some(_) => -1,
    }
}

/// Search for a primitive solution of `a^2 + d b^2 = 4 p^m` with `b >= 1`,
/// smallest `b` first (`a >= 0` is then determined).  Primitive means not
/// both `a` and `b` divisible by `p`, so the solution generates `P^m` or
/// its conjugate rather than a multiple of `(p)`.
fn search_norm_form(d: u64, p: u64, m: u64) -> Option<(u64, u64)> {
    let pm = (p as u128).checked_pow(u32::try_from(m).ok()?)?;
    let target = 4u128.checked_mul(pm)?;
    let d = d as u128;
    let p = p as u128;
    let mut b = 1u128;
    while d * b * b <= target {
        let rem = target - d * b * b;
        let a = rem.isqrt();
        if a * a == rem && !(a % p == 0 && b % p == 0) {
            return Some((a as u64, b as u64));
        }
        b += 1;
    }
    None
}

/// The order of the ideal class of a prime `P` above `p` in the class group
/// of `Q(sqrt(disc))`: the smallest `m >= 1` such that `P^m` is principal,
/// detected as the smallest exponent for which `a^2 + D b^2 = 4 p^m` has a
/// primitive solution.  Always divides the class number.
pub fn prime_class_order(disc: i64, p: u64) -> Result<u64> {
    let chi = quadratic_character(disc)?;
    let value = split_value(&chi, p);
    if value != 1 {
        return Err(Error::NotSplitQuadratic { p, value });
    }
    let d = disc.unsigned_abs();
    let h = class_number(disc)?;
    for m in 1..=h {
        if search_norm_form(d, p, m).is_some() {
            return Ok(m);
        }
    }
    Err(Error::NormFormSearch { d, p })
}

/// A generator of `P^h` in `Q(sqrt(disc))`: the element
/// `x = (a + b sqrt(disc)) / 2` of norm `(a^2 + D b^2)/4 = p^h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImagQuadPUnit {
    disc: i64,
    p: u64,
    h: u64,
    a: u64,
    b: u64,
}

impl ImagQuadPUnit {
    /// The negative fundamental discriminant.
    pub fn disc(&self) -> i64 {
        self.disc
    }
    /// The split prime `p`.
    pub fn p(&self) -> u64 {
        self.p
    }
    /// The class number `h` of the discriminant (= the norm exponent).
    pub fn class_number(&self) -> u64 {
        self.h
    }
    /// The rational coordinate `a` of `x = (a + b sqrt(disc))/2`.
    pub fn a(&self) -> u64 {
        self.a
    }
    /// The `sqrt(disc)` coordinate `b >= 1` of `x = (a + b sqrt(disc))/2`.
    pub fn b(&self) -> u64 {
        self.b
    }
}

impl fmt::Display for ImagQuadPUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*sqrt({}))/2", self.a, self.b, self.disc)
    }
}

/// Find the generator of `P^h` for the pair `(disc, p)` by bounded
/// norm-form search: the primitive solution of `a^2 + D b^2 = 4 p^h` with
/// smallest `b >= 1`.  Requires `p` split (`chi(p) = 1`).
///
/// A valid split input always has a solution: `P^h` is principal and a
/// generator cannot be rational (that would force `P = P-bar`), so its
/// `sqrt(disc)` coordinate is a nonzero integer.
pub fn find_p_unit(disc: i64, p: u64) -> Result<ImagQuadPUnit> {
    let chi = quadratic_character(disc)?;
    let value = split_value(&chi, p);
    if value != 1 {
        return Err(Error::NotSplitQuadratic { p, value });
    }
    let d = disc.unsigned_abs();
    let h = class_number(disc)?;
    let (a, b) = search_norm_form(d, p, h).ok_or(Error::NormFormSearch { d, p })?;
    debug_assert_eq!(
        (a as u128) * (a as u128) + (d as u128) * (b as u128) * (b as u128),
        4 * (p as u128).pow(h as u32)
    );
    Ok(ImagQuadPUnit { disc, p, h, a, b })
}

/// Largest `N` with `p^N < 2^63`, the scalar-ring precision cap at `p`.
fn max_precision(p: u64) -> u32 {
    let mut e = 0;
    let mut m = 1u64;
    while m <= (u64::MAX / 2) / p {
        m *= p;
        e += 1;
    }
    e
}

/// Hensel square root of `disc` in a scalar ring: brute-force root mod `p`,
/// then Newton iteration to full ring precision.  Requires `disc` to be a
/// nonzero quadratic residue mod `p` (guaranteed when `chi(p) = 1`).
fn sqrt_in_ring(ring: &UnramifiedWitnessRing, disc: i64) -> Result<PadicElement> {
    let p = ring.p();
    let target = ring.from_i64(disc);
    let t0 = disc.rem_euclid(p as i64) as u64;
    let mut r0 = 0;
    for r in 1..p {
        if (r as u128 * r as u128 % p as u128) as u64 == t0 {
            r0 = r;
            break;
        }
    }
    if r0 == 0 {
        return Err(Error::NotSplitQuadratic { p, value: -1 });
    }
    let mut r = ring.from_u64(r0);
    for _ in 0..=ring.precision().ilog2() + 1 {
        let f = r.mul(&r).sub(&target);
        let slope_inv = r.mul_scalar(2).inverse()?;
        r = r.sub(&f.mul(&slope_inv));
    }
    if !r.mul(&r).eq_mod(&target, ring.precision()) {
        return Err(Error::Internal("Hensel square root did not converge".into()));
    }
    Ok(r)
}

/// The L-invariant of a split pair, with the data it was computed from.
#[derive(Clone, Debug)]
pub struct LInvariant {
    value: PadicElement,
    unit: ImagQuadPUnit,
    embedding_root: u64,
}

impl LInvariant {
    /// The value `2 log_p(x) / h` in the caller's ring (a scalar).
    pub fn value(&self) -> &PadicElement {
        &self.value
    }
    /// The p-unit `x` the value was computed from.
    pub fn unit(&self) -> &ImagQuadPUnit {
        &self.unit
    }
    /// The chosen embedding, recorded as the image of `sqrt(disc)` modulo
    /// `p^prec` for the precision of [`Self::value`]: the Hensel root under
    /// which `v_p(x) = h`.
    pub fn embedding_root(&self) -> u64 {
        self.embedding_root
    }
}

/// Compute the L-invariant `2 log_p(x) / h` for `(disc, p = ring.p())`.
///
/// The logarithm is evaluated in a private scalar ring at boosted precision
/// (the rescale by `p^h` and the logarithm's own tail cost digits), then the
/// result is reduced into the caller's ring.  Of the two Hensel roots the
/// one giving `v_p(x) = h` is selected; the other sees a unit.
pub fn l_invariant(disc: i64, ring: &UnramifiedWitnessRing) -> Result<LInvariant> {
    let p = ring.p();
    let unit = find_p_unit(disc, p)?;
    let h = unit.h;
    if h % p == 0 {
        return Err(Error::ClassNumberDivisibleByP { h, p });
    }
    let boosted = (ring.precision() + h as u32 + 4).min(max_precision(p));
    let scalar = UnramifiedWitnessRing::build(p, boosted, &[])?;
    let half = scalar.from_u64(2).inverse()?;
    let embed = |root: &PadicElement| {
        scalar
            .from_u64(unit.a)
            .add(&scalar.from_u64(unit.b).mul(root))
            .mul(&half)
    };
    let mut root = sqrt_in_ring(&scalar, disc)?;
    let mut iota = embed(&root);
    if iota.valuation() != Some(h as u32) {
        root = root.neg();
        iota = embed(&root);
        if iota.valuation() != Some(h as u32) {
            return Err(Error::EmbeddingValuation);
        }
    }
    let log = iota.rescale_down(h as u32)?.iwasawa_log()?;
    let value = log.mul_scalar(2).mul(&scalar.from_u64(h).inverse()?);

    let prec = value.precision().min(ring.precision());
    let pe = p.pow(prec);
    let mut coeffs = vec![0u64; ring.degree()];
    coeffs[0] = value.coeffs()[0] % pe;
    Ok(LInvariant {
        value: ring.from_coeffs(coeffs, prec)?,
        unit,
        embedding_root: root.coeffs()[0] % pe,
    })
}

/// The height value `-(L-inv) * L(0, chi^{-1})` of the split pair, as an
/// element of the caller's ring.  `L(0, chi^{-1}) = -B_{1, chi^{-1}}` is
/// exact and p-integral (the conductor is prime to `p`).
pub fn height_value(disc: i64, ring: &UnramifiedWitnessRing) -> Result<PadicElement> {
    let chi = quadratic_character(disc)?;
    let li = l_invariant(disc, ring)?;
    let l0 = chi
        .inverse()
        .l_value_exact(1)
        .as_rational()
        .ok_or_else(|| Error::Internal("quadratic L(0) is rational".into()))?;
    Ok(li.value.neg().mul(&ring.from_rational(&l0)?))
}

/// The two sides of the Ferrero–Greenberg identity and their agreement.
#[derive(Clone, Debug)]
pub struct FerreroGreenbergCheck {
    /// `(d/ds) L_p(s, chi^{-1} omega)` at `s = 0`, from the branch series.
    pub lhs: PadicElement,
    /// `-(L-inv) * L(0, chi^{-1})`, from the norm-form generator.
    pub rhs: PadicElement,
    /// `L_p(0, chi^{-1} omega)` — the exceptional zero, which must vanish.
    pub zero_value: PadicElement,
    /// Number of agreeing digits between `lhs` and `rhs`.
    pub agreement: u32,
    /// The smaller of the two stated precisions: full agreement means
    /// `agreement >= comparable`.
    pub comparable: u32,
}

impl FerreroGreenbergCheck {
    /// Whether the identity holds to the comparable precision and the
    /// exceptional zero vanishes.
    pub fn holds(&self) -> bool {
        self.agreement >= self.comparable && self.zero_value.is_zero()
    }
}

/// Verify the Ferrero–Greenberg derivative formula for `(disc, p)`: build
/// the `chi^{-1} omega` branch series at the given tower level and
/// truncation, evaluate its derivative at `s = 0`, and compare with the
/// height value computed from the p-unit.
pub fn ferrero_greenberg_check(
    disc: i64,
    ring: &UnramifiedWitnessRing,
    level: u32,
    m_len: usize,
) -> Result<FerreroGreenbergCheck> {
    let chi = quadratic_character(disc)?;
    let series = build_series(ring, &chi.inverse(), 1, level, m_len)?;
    let zero_value = series.lp_eval(0)?;
    let lhs = series.lp_derivative(0)?;
    let rhs = height_value(disc, ring)?;
    let agreement = lhs.agreement_exponent(&rhs);
    let comparable = lhs.precision().min(rhs.precision());
    Ok(FerreroGreenbergCheck {
        lhs,
        rhs,
        zero_value,
        agreement,
        comparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32, orders: &[u64]) -> UnramifiedWitnessRing {
        UnramifiedWitnessRing::build(p, n, orders).unwrap()
    }

    /// Kronecker symbol `(a / n)`, the classical iterative algorithm, as an
    /// independent oracle for the character attached to a discriminant.
    fn kronecker(a: i64, n: i64) -> i64 {
        if n == 0 {
            return if a.abs() == 1 { 1 } else { 0 };
        }
        if a % 2 == 0 && n % 2 == 0 {
            return 0;
        }
        let (mut a, mut n) = (a, n);
        let mut result = 1;
        if n < 0 {
            n = -n;
            if a < 0 {
                result = -result;
            }
        }
        while n % 2 == 0 {
            n /= 2;
            match a.rem_euclid(8) {
                1 | 7 => {}
                3 | 5 => result = -result,
                _ => return 0,
            }
        }
        a = a.rem_euclid(n);
        while a != 0 {
            while a % 2 == 0 {
                a /= 2;
                if matches!(n.rem_euclid(8), 3 | 5) {
                    result = -result;
                }
            }
            std::mem::swap(&mut a, &mut n);
            if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
                result = -result;
            }
            a = a.rem_euclid(n);
        }
        if n == 1 {
            result
        } else {
            0
        }
    }

    #[test]
    fn fundamental_discriminant_classification() {
        for d in [-3i64, -4, -7, -8, -11, -15, -19, -20, -23, -24, -43, -84, -120, -163] {
            assert!(is_fundamental(d), "{d}");
        }
        for d in [-1i64, -2, -9, -12, -16, -18, -25, -27, -36, -44, -45, -48, 0, 1, 5, 8, 12] {
            assert!(!is_fundamental(d), "{d}");
        }
    }

    /// Classical class-number table for small discriminants.
    #[test]
    fn class_numbers_match_table() {
        for (d, h) in [
            (-3i64, 1u64),
            (-4, 1),
            (-7, 1),
            (-8, 1),
            (-11, 1),
            (-15, 2),
            (-20, 2),
            (-23, 3),
            (-24, 2),
            (-31, 3),
            (-47, 5),
            (-71, 7),
            (-84, 4),
            (-120, 4),
            (-163, 1),
        ] {
            assert_eq!(class_number(d).unwrap(), h, "disc {d}");
        }
        assert!(matches!(class_number(-12), Err(Error::NotFundamental(-12))));
    }

    /// The attached character is the Kronecker symbol `(disc / .)`.
    #[test]
    fn quadratic_character_matches_kronecker() {
        for disc in [-3i64, -4, -7, -8, -15, -20, -23, -24] {
            let chi = quadratic_character(disc).unwrap();
            assert!(chi.is_odd() && chi.is_primitive() && chi.order() == 2);
            assert_eq!(chi.conductor(), disc.unsigned_abs());
            for a in 1..=30u64 {
                let expected = kronecker(disc, a as i64);
                let got = match chi.value_exponent(a) {
                    None => 0,
                    Some(0) => 1,
                    Some(_) => -1,
                };
                assert_eq!(got, expected, "disc {disc}, a {a}");
            }
        }
        assert!(matches!(
            quadratic_character(-18),
            Err(Error::NotFundamental(-18))
        ));
    }

    #[test]
    fn find_p_unit_matches_known_generators() {
        // x = 2 + i, norm 5.
        let u = find_p_unit(-4, 5).unwrap();
        assert_eq!((u.a(), u.b(), u.class_number()), (4, 1, 1));
        // x = (5 + sqrt(-3))/2, norm 7.
        let u = find_p_unit(-3, 7).unwrap();
        assert_eq!((u.a(), u.b(), u.class_number()), (5, 1, 1));
        // x = 3 + 2i, norm 13.
        let u = find_p_unit(-4, 13).unwrap();
        assert_eq!((u.a(), u.b(), u.class_number()), (6, 2, 1));
        // x = 1 + sqrt(-2), norm 3.
        let u = find_p_unit(-8, 3).unwrap();
        assert_eq!((u.a(), u.b(), u.class_number()), (2, 1, 1));
        // x = 2 + sqrt(-23), norm 27 = 3^h with h = 3.
        let u = find_p_unit(-23, 3).unwrap();
        assert_eq!((u.a(), u.b(), u.class_number()), (4, 2, 3));
        assert_eq!(u.to_string(), "(4 + 2*sqrt(-23))/2");

        // Inert and ramified primes are rejected with the character value.
        assert!(matches!(
            find_p_unit(-4, 7),
            Err(Error::NotSplitQuadratic { p: 7, value: -1 })
        ));
        assert!(matches!(
            find_p_unit(-20, 5),
            Err(Error::NotSplitQuadratic { p: 5, value: 0 })
        ));
        assert!(matches!(find_p_unit(-12, 5), Err(Error::NotFundamental(-12))));
    }

    /// The smallest norm-form exponent is the order of the ideal class of
    /// `P`, so it divides the class number; the generator search at the
    /// class number itself always succeeds.  Equality with the class number
    /// can fail (the class of `P` need not generate): `(-24, 7)` has a
    /// principal prime above 7 while h = 2.
    #[test]
    fn prime_class_order_divides_class_number() {
        let mut checked = 0;
        for disc in -40..-2i64 {
            if !is_fundamental(disc) {
                continue;
            }
            let h = class_number(disc).unwrap();
            for p in [3u64, 5, 7, 11, 13] {
                let chi = quadratic_character(disc).unwrap();
                if split_value(&chi, p) != 1 {
                    continue;
                }
                let m = prime_class_order(disc, p).unwrap();
                assert_eq!(h % m, 0, "disc {disc}, p {p}: {m} must divide {h}");
                assert!(find_p_unit(disc, p).is_ok(), "disc {disc}, p {p}");
                checked += 1;
            }
        }
        assert!(checked > 20, "sweep too small: {checked}");
        assert_eq!(prime_class_order(-24, 7).unwrap(), 1);
        assert_eq!(class_number(-24).unwrap(), 2);
        assert_eq!(prime_class_order(-23, 3).unwrap(), 3);
    }

    /// Hand-checked anchor at (disc, p) = (-4, 5): the Hensel root with
    /// v(iota(x)) = 1 is sqrt(-4) = 11 mod 125 (11^2 + 4 = 125), so
    /// iota(2 + i) = 15/2 = 70 mod 125, with unit part u = 14 mod 25.
    /// Then <u> = 14/teich(14) = 14/(-1) = 11 mod 25, log(11) = 10 mod 25,
    /// and the L-invariant is 2 log(u)/1 = 20 mod 25.  One more digit:
    /// u = 89 mod 125, <u> = 36, log(36) = 35 - 35^2/2 = 110 mod 125,
    /// so the L-invariant is 220 = 95 mod 125.
    #[test]
    fn l_invariant_anchor_mod_125() {
        let w = ring(5, 2, &[]);
        let li = l_invariant(-4, &w).unwrap();
        assert!(li.value().precision() >= 2);
        assert_eq!(li.value().coeffs()[0] % 25, 20);
        assert_eq!(li.embedding_root() % 25, 11);
        assert_eq!((li.unit().a(), li.unit().b()), (4, 1));

        let w3 = ring(5, 3, &[]);
        let li3 = l_invariant(-4, &w3).unwrap();
        assert!(li3.value().precision() >= 3);
        assert_eq!(li3.value().coeffs()[0] % 125, 95);
    }

    /// Stability under precision boost, and invariance under torsion-unit
    /// multiples of the generator (computed manually with the exact
    /// fourth root of unity: log kills i, so log iota(i*x) = log iota(x)).
    #[test]
    fn l_invariant_stability_and_unit_invariance() {
        let lo = l_invariant(-4, &ring(5, 4, &[])).unwrap();
        let hi = l_invariant(-4, &ring(5, 7, &[])).unwrap();
        let e = lo.value().precision().min(hi.value().precision());
        assert!(e >= 4);
        assert_eq!(
            lo.value().coeffs()[0] % 5u64.pow(e),
            hi.value().coeffs()[0] % 5u64.pow(e)
        );

        let w = ring(5, 8, &[4]);
        // The valuation-1 embedding of x = 2 + i sends i to whichever exact
        // fourth root of unity is congruent to -2 mod 5.
        let mut i = w.zeta(4).unwrap();
        if w.from_u64(2).add(&i).valuation() != Some(1) {
            i = i.neg();
        }
        let iota_x = w.from_u64(2).add(&i);
        assert_eq!(iota_x.valuation(), Some(1));
        let log_x = iota_x.rescale_down(1).unwrap().iwasawa_log().unwrap();
        let iota_ix = i.mul(&iota_x); // embedding of the unit multiple i*x
        let log_ix = iota_ix.rescale_down(1).unwrap().iwasawa_log().unwrap();
        let e = log_x.precision().min(log_ix.precision());
        assert!(e >= 4);
        assert!(log_x.eq_mod(&log_ix, e));
        // ... and the negative.
        let log_neg = iota_x
            .neg()
            .rescale_down(1)
            .unwrap()
            .iwasawa_log()
            .unwrap();
        assert!(log_x.eq_mod(&log_neg, e.min(log_neg.precision())));
    }

    /// Height anchors: -(L-inv) * L(0, chi) = -20 * (1/2) = 15 mod 25 at
    /// (-4, 5); nonzero at (-3, 7).  Bad discriminants and non-split or
    /// p-divisible class data error.
    #[test]
    fn height_value_anchors_and_guards() {
        let w = ring(5, 2, &[]);
        let hv = height_value(-4, &w).unwrap();
        assert!(hv.precision() >= 2);
        assert_eq!(hv.coeffs()[0] % 25, 15);

        let w7 = ring(7, 6, &[]);
        let hv7 = height_value(-3, &w7).unwrap();
        assert!(!hv7.is_zero());

        assert!(matches!(height_value(12, &w), Err(Error::NotFundamental(12))));
        assert!(matches!(
            height_value(-4, &ring(7, 4, &[])),
            Err(Error::NotSplitQuadratic { p: 7, value: -1 })
        ));
        // p = 3 divides h(-23) = 3: the scaled logarithm is rejected.
        assert!(matches!(
            l_invariant(-23, &ring(3, 4, &[])),
            Err(Error::ClassNumberDivisibleByP { h: 3, p: 3 })
        ));
    }

    /// The Ferrero–Greenberg identity on six split pairs, including the
    /// hand-checked mod-25 anchor (both sides 15 mod 25 at (-4, 5)) and
    /// class numbers h = 2 (disc -20) and h = 5 (disc -47).  The derivative
    /// side comes from the Stickelberger branch series, the height side
    /// from the norm-form generator — fully independent routes.
    #[test]
    fn ferrero_greenberg_matches_derivative() {
        for (disc, p, level) in [
            (-4i64, 5u64, 4u32),
            (-3, 7, 4),
            (-3, 13, 3),
            (-8, 3, 4),
            (-20, 3, 4),
            (-47, 3, 4),
        ] {
            let w = ring(p, 9, &[]);
            let check = ferrero_greenberg_check(disc, &w, level, 9).unwrap();
            assert!(
                check.zero_value.is_zero(),
                "disc {disc}, p {p}: exceptional zero must vanish, got {}",
                check.zero_value
            );
            assert!(check.comparable >= 3, "disc {disc}, p {p}");
            assert!(
                check.holds(),
                "disc {disc}, p {p}: agreement {} below comparable {} (lhs {}, rhs {})",
                check.agreement,
                check.comparable,
                check.lhs,
                check.rhs
            );
        }
        let w = ring(5, 9, &[]);
        let check = ferrero_greenberg_check(-4, &w, 4, 9).unwrap();
        assert!(check.comparable >= 4);
        assert_eq!(check.lhs.coeffs()[0] % 25, 15);
        assert_eq!(check.rhs.coeffs()[0] % 25, 15);
    }
}
