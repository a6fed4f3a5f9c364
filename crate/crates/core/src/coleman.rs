//! Coleman power series, Amice measures, and the unit-tower transform.
//!
//! The cyclotomic tower over a conductor `f` prime to `p` carries the
//! norm-coherent units `1 - zeta_f zeta_{p^n}^a`.  Coleman's interpolation
//! packages each coherent system into a single power series `g(T)` with
//! `g(zeta_{p^n} - 1)` recovering the level-`n` unit; for the tower starting
//! at `zeta = zeta_f^a` the series is simply `g(T) = zeta (1 + T) - 1`.
//!
//! Three operators act on truncated series over the Witt ring `W`:
//!
//! * the Frobenius lift `phi(h) = h^sigma((1+T)^p - 1)`,
//! * the left inverse `psi` with `psi(phi(h)) = h` and
//!   `phi(psi(h)) = (1/p) sum_{zeta^p=1} h(zeta(1+T) - 1)` (the averaging
//!   projector onto the `phi`-image), and
//! * the logarithmic transform `g -> lambda = (1 - phi/p) log g`, computed
//!   integrally as `(1/p) log(g^p / phi(g))`.
//!
//! `lambda` is the Amice transform of a `W`-valued measure on `Z_p`: the
//! Mahler coefficients of the measure are the `T`-coefficients of `lambda`,
//! so moments come from Stirling numbers and restriction to a unit disc
//! `u + pZ_p` is `(1+T)^u phi(psi((1+T)^{-u} lambda))`.  Norm coherence of
//! the tower is equivalent to `psi(lambda) = 0`, which is checked digit by
//! digit when a measure is built.
//!
//! The Gamma-transform of a measure supported on `Z_p^*`,
//!
//! ```text
//! F((1+p)^s - 1) = integral of omega^j(x) <x>^s dmu(x),
//! ```
//!
//! is the bridge to the Kubota-Leopoldt branch series: summing the tower
//! measures against an even character `chi` with `chi(p) = 1` and applying
//! the `j = 0` transform reproduces the branch series times the constant
//! `kappa = -tau(chi^{-1})` (a negated Gauss sum).  The same machinery
//! applied to the regularized uniformizer tower `((1+T)^c - 1)/T` produces
//! the alpha-coordinate at the split place, the quantity that closes the
//! triangle `S(chi) * alpha(v_0) = L_p(1, chi)` against the Kronecker-style
//! limit formula.
//!
//! Everything here is exact mod `p^N` arithmetic with per-element precision
//! tracking; truncation-tail effects of `psi` are bounded explicitly (see
//! [`psi_tail_bound`]) and folded into the precision of every coefficient
//! they touch.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo_units::{embed_cyc, require_even_tame};
use crate::dirichlet::DirichletCharacter;
use crate::error::{Error, Result};
use crate::iwasawa::build_series;
use crate::ring::{
    addm, checked_pow, mulm, valp, ElementDescriptor, PadicElement, PadicScaled, RingDescriptor,
    UnramifiedWitnessRing,
};
use crate::series::TruncatedSeries;

/// Extra digits of working precision used by the transform pipelines; the
/// moment sums lose roughly `v_p(i*!) + v_p(m!)` digits plus the single
/// rescale in the measure construction, and this margin absorbs all of it
/// for truncation lengths up to 20.
const GAMMA_BOOST: u32 = 10;

/// Hard cap on the length of a Gamma-transform: the linear assembly uses
/// `i64` Stirling scalars, which are exact only up to factorials of 19.
const MAX_GAMMA_LEN: usize = 20;

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Largest precision exponent the ring constructor accepts for `p`.
fn max_precision(p: u64) -> u32 {
    let mut e = 1;
    while checked_pow(p, e + 1, 1 << 63).is_some() {
        e += 1;
    }
    e
}

/// `v_p` of a nonzero rational, as a (possibly negative) integer.
fn rational_vp(r: &BigRational, p: u64) -> i64 {
    fn vp(mut n: BigInt, p: &BigInt) -> i64 {
        let mut v = 0;
        while (&n % p).is_zero() {
            n /= p;
            v += 1;
        }
        v
    }
    let pb = BigInt::from(p);
    vp(r.numer().abs(), &pb) - vp(r.denom().abs(), &pb)
}

// ---------------------------------------------------------------------------
// The operators phi and psi.
// ---------------------------------------------------------------------------

/// Truncation-tail bound for `psi`: if `h` is known only modulo `T^len`,
/// coefficient `degree` of `psi` of the true series is determined modulo
/// `p^bound` with `bound = floor((len - p*degree)/(p-1)) - 1`.
///
/// The bound comes from the trace description of `phi psi`: a tail
/// `T^len R(T)` contributes to the degree-`i` coefficient of the trace only
/// through `(zeta_p - 1)^{len - pi}`-multiples of integral elements, whose
/// traces are divisible by `p^{floor((len-pi)/(p-1))}`; dividing by `p` costs
/// one more digit.  Degrees with a nonpositive bound carry no information.
pub fn psi_tail_bound(len: usize, p: u64, degree: usize) -> u32 {
    let num = len as i64 - p as i64 * degree as i64;
    if num <= 0 {
        return 0;
    }
    (num / (p as i64 - 1) - 1).max(0) as u32
}

/// The Frobenius operator `phi(h) = h^sigma((1+T)^p - 1)`, computed to
/// `out_len` coefficients.
///
/// `h` is treated as the polynomial formed by its listed coefficients, so
/// the result is exact for polynomial inputs of any length.  The
/// substitution is done on the binomial basis `U^m = (1+T)^m`: writing
/// `h^sigma = sum_m K_m U^m` turns `phi(h)` into `sum_m K_m (1+T)^{pm}`,
/// which needs only Pascal rows instead of repeated series products.
pub fn phi_operator(h: &TruncatedSeries, out_len: usize) -> TruncatedSeries {
    let ring = h.ring().clone();
    let out_len = out_len.max(1);
    let l = h.len();
    let pn = ring.pn();
    let p = ring.p() as usize;
    if l == 0 {
        return TruncatedSeries::zero(&ring, out_len);
    }

    // K_m = sum_n sigma(a_n) C(n, m) (-1)^{n-m}, the U-basis coefficients.
    let mut k: Vec<PadicElement> = vec![ring.zero(); l];
    let mut row: Vec<u64> = Vec::with_capacity(l);
    row.push(1);
    for n in 0..l {
        let a = h.coeff(n);
        if !a.is_zero() || a.precision() < ring.precision() {
            let af = a.frobenius();
            for (m, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let s = if (n - m) % 2 == 1 { (pn - c) % pn } else { c };
                k[m] = k[m].add(&af.mul_scalar(s));
            }
        }
        // advance Pascal row n -> n + 1 in place
        row.push(1);
        for m in (1..row.len() - 1).rev() {
            row[m] = addm(row[m], row[m - 1], pn);
        }
    }

    // out = sum_m K_m (1+T)^{pm}; walk the Pascal triangle row by row and
    // pick up every p-th row, keeping only the first out_len columns.
    let mut out: Vec<PadicElement> = vec![ring.zero(); out_len];
    let mut prow: Vec<u64> = vec![0; out_len];
    prow[0] = 1;
    let mut width = 1usize;
    for (m, km) in k.iter().enumerate() {
        if m > 0 {
            for _ in 0..p {
                let new_width = (width + 1).min(out_len);
                for c in (1..new_width).rev() {
                    prow[c] = addm(prow[c], prow[c - 1], pn);
                }
                width = new_width;
            }
        }
        if km.is_zero() && km.precision() == ring.precision() {
            continue;
        }
        for (i, acc) in out.iter_mut().enumerate().take(width) {
            if prow[i] != 0 {
                *acc = acc.add(&km.mul_scalar(prow[i]));
            }
        }
    }
    TruncatedSeries::new(&ring, out)
}

/// The trace-averaging left inverse of `phi`.
///
/// Decomposing `h = sum_{i mod p} (1+T)^i (phi k_i)((1+T)^p - 1)` and
/// extracting the class-`0` part gives `psi(h) = k_0`; on the binomial basis
/// the extraction is an upper-triangular integer solve with unit diagonal,
/// so no precision is lost.  The identities `psi(phi(h)) = h` and
/// `psi((1+T)^i phi(h)) = 0` for `i` not divisible by `p` hold exactly for
/// polynomial inputs; for truncations of longer series, coefficient `j` of
/// the output is valid modulo `p^{psi_tail_bound(len, p, j)}`.
pub fn psi_operator(h: &TruncatedSeries) -> Result<TruncatedSeries> {
    let ring = h.ring().clone();
    let p = ring.p();
    let pu = p as usize;
    let pn = ring.pn();
    let l = h.len();
    if l < pu {
        return Err(Error::TruncationInsufficient {
            m: l,
            why: format!("the averaging operator needs at least p = {p} coefficients"),
        });
    }
    let jmax = (l - 1) / pu;

    // H[j] = coefficient of U^{pj} when h is written on the basis U^m.
    let mut hh: Vec<PadicElement> = vec![ring.zero(); jmax + 1];
    let mut row: Vec<u64> = Vec::with_capacity(l);
    row.push(1);
    for n in 0..l {
        let a = h.coeff(n);
        if !a.is_zero() || a.precision() < ring.precision() {
            for j in 0..=(n / pu) {
                let m = pu * j;
                let c = row[m];
                if c == 0 {
                    continue;
                }
                let s = if (n - m) % 2 == 1 { (pn - c) % pn } else { c };
                hh[j] = hh[j].add(&a.mul_scalar(s));
            }
        }
        row.push(1);
        for m in (1..row.len() - 1).rev() {
            row[m] = addm(row[m], row[m - 1], pn);
        }
    }

    // Back-substitute H[j'] = sum_{j >= j'} k_j C(j, j') (-1)^{j - j'}.
    let mut small: Vec<Vec<u64>> = Vec::with_capacity(jmax + 1);
    for j in 0..=jmax {
        let mut r = vec![0u64; j + 1];
        r[0] = 1;
        if j > 0 {
            let prev = &small[j - 1];
            for m in 1..=j {
                let up = if m <= j - 1 { prev[m] } else { 0 };
                let left = prev[m - 1];
                r[m] = addm(up, left, pn);
            }
        }
        small.push(r);
    }
    let mut k0: Vec<PadicElement> = vec![ring.zero(); jmax + 1];
    for jp in (0..=jmax).rev() {
        let mut acc = hh[jp].clone();
        for j in jp + 1..=jmax {
            let c = small[j][jp];
            if c == 0 {
                continue;
            }
            let s = if (j - jp) % 2 == 1 { (pn - c) % pn } else { c };
            acc = acc.sub(&k0[j].mul_scalar(s));
        }
        k0[jp] = acc;
    }
    let coeffs = k0.into_iter().map(|c| c.frobenius_inv()).collect();
    Ok(TruncatedSeries::new(&ring, coeffs))
}

// ---------------------------------------------------------------------------
// Coleman series of the cyclotomic towers.
// ---------------------------------------------------------------------------

/// The Coleman power series of a norm-coherent unit tower: `g(T)` evaluates
/// to the level-`n` unit at `T = zeta_{p^{n+1}} - 1`.
#[derive(Clone, Debug)]
pub struct ColemanSeries {
    series: TruncatedSeries,
    root: PadicElement,
    f: u64,
}

impl ColemanSeries {
    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }
    /// The tame root of unity `zeta_f^a` anchoring the tower.
    pub fn root(&self) -> &PadicElement {
        &self.root
    }
    /// The tame conductor `f` of the tower.
    pub fn conductor(&self) -> u64 {
        self.f
    }
    /// The series of the tower one norm step down: the root is replaced by
    /// its Frobenius image `zeta^p`.
    pub fn norm_image(&self) -> ColemanSeries {
        ColemanSeries {
            series: linear_tower(self.series.ring(), &self.root.frobenius(), self.series.len()),
            root: self.root.frobenius(),
            f: self.f,
        }
    }
}

fn linear_tower(ring: &UnramifiedWitnessRing, root: &PadicElement, len: usize) -> TruncatedSeries {
    let mut coeffs = vec![ring.zero(); len.max(2)];
    coeffs[0] = root.sub(&ring.one());
    coeffs[1] = root.clone();
    TruncatedSeries::new(ring, coeffs)
}

/// The Coleman series `g(T) = zeta_f^a (1+T) - 1` of the unit tower
/// `1 - zeta_f^a zeta_{p^{n+1}}`, truncated to `len` coefficients.
///
/// Requires `f > 1` (the conductor-one tower needs the regularized
/// uniformizer treatment in [`alpha_at_v0`]) and `a` invertible mod `f`, so
/// that the root is a primitive `f`-th root of unity and the constant term
/// `zeta - 1` is a unit.
pub fn tower_series(
    ring: &UnramifiedWitnessRing,
    f: u64,
    a: u64,
    len: usize,
) -> Result<ColemanSeries> {
    if f == 1 {
        return Err(Error::TowerDegenerate);
    }
    if gcd(a % f, f) != 1 {
        return Err(Error::Internal(format!(
            "tower index {a} is not invertible mod {f}"
        )));
    }
    let root = ring.zeta(f)?.pow_u64(a % f);
    Ok(ColemanSeries {
        series: linear_tower(ring, &root, len),
        root,
        f,
    })
}

fn pow_series(s: &TruncatedSeries, e: u64) -> TruncatedSeries {
    let mut acc = TruncatedSeries::one(s.ring(), s.len());
    let mut base = s.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    acc
}

/// `(1/p) log q` for a series `q` congruent to `1` modulo `p`
/// coefficientwise, via `lambda = sum_m (-1)^{m+1} (p^{m-1}/m) r^m` with
/// `q = 1 + p r`.  Exactly one digit of precision is spent extracting `r`.
fn one_unit_log_over_p(q: &TruncatedSeries) -> Result<TruncatedSeries> {
    let ring = q.ring().clone();
    let p = ring.p();
    let n = ring.precision();
    let l = q.len();
    let one = TruncatedSeries::one(&ring, l);
    let diff = q.sub(&one);
    let mut r_coeffs = Vec::with_capacity(l);
    for (i, c) in diff.coeffs().iter().enumerate() {
        let reduced = c
            .rescale_down(1)
            .map_err(|_| Error::NormIdentity { index: i })?;
        r_coeffs.push(reduced);
    }
    let r = TruncatedSeries::new(&ring, r_coeffs);

    // Terms with m - 1 - v_p(m) >= N vanish mod p^N; m <= N + 5 covers the
    // rest for every odd p and N <= 22.
    let m_stop = n + 5;
    let mut acc = TruncatedSeries::zero(&ring, l);
    let mut rpow = r.clone();
    for m in 1..=u64::from(m_stop) {
        let v = valp(m, p, 63);
        let exp = m as u32 - 1 - v;
        if exp < n {
            let unit = m / checked_pow(p, v, u64::MAX).expect("p^v divides m");
            let scal = ring.from_u64(unit).inverse()?.mul_p_pow(exp);
            let term = rpow.mul_elem(&scal);
            acc = if m % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        }
        if m < u64::from(m_stop) {
            rpow = rpow.mul(&r);
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Amice measures.
// ---------------------------------------------------------------------------

/// A `W`-valued measure on `Z_p`, stored through its Amice transform
/// `lambda(T) = integral of (1+T)^x dmu(x)`: coefficient `m` of `lambda` is
/// the measure of the Mahler binomial `C(x, m)`.
///
/// `restricted` records that the measure is supported on `Z_p^*`
/// (equivalently `psi(lambda) = 0`), the precondition for the
/// Gamma-transform.
#[derive(Clone, Debug)]
pub struct AmiceMeasure {
    lambda: TruncatedSeries,
    restricted: bool,
}

/// Serialization form of a measure (`"kind": "amice"`), with every integer
/// rendered as a decimal string.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmiceMeasureDescriptor {
    pub kind: String,
    pub ring: RingDescriptor,
    pub restricted: bool,
    pub coeffs: Vec<ElementDescriptor>,
}

impl AmiceMeasure {
    /// Wrap an Amice transform directly; the caller asserts nothing about
    /// the support (use [`AmiceMeasure::restrict`] to project onto the
    /// units).
    pub fn from_transform(lambda: TruncatedSeries) -> Self {
        AmiceMeasure {
            lambda,
            restricted: false,
        }
    }

    /// The point mass at `u`, whose transform is `(1+T)^u`; it is supported
    /// on the units exactly when `u` is prime to `p`.
    pub fn dirac(ring: &UnramifiedWitnessRing, u: u64, len: usize) -> Self {
        AmiceMeasure {
            lambda: TruncatedSeries::one_plus_t_pow_i64(ring, u as i64, len.max(1)),
            restricted: u % ring.p() != 0,
        }
    }

    pub fn lambda(&self) -> &TruncatedSeries {
        &self.lambda
    }
    pub fn restricted(&self) -> bool {
        self.restricted
    }
    pub fn len(&self) -> usize {
        self.lambda.len()
    }
    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn add(&self, other: &AmiceMeasure) -> AmiceMeasure {
        AmiceMeasure {
            lambda: self.lambda.add(&other.lambda),
            restricted: self.restricted && other.restricted,
        }
    }
    pub fn mul_elem(&self, c: &PadicElement) -> AmiceMeasure {
        AmiceMeasure {
            lambda: self.lambda.mul_elem(c),
            restricted: self.restricted,
        }
    }
    pub fn neg(&self) -> AmiceMeasure {
        AmiceMeasure {
            lambda: self.lambda.neg(),
            restricted: self.restricted,
        }
    }

    /// The `k`-th moment `integral of x^k dmu`, through the Stirling
    /// expansion `x^k = sum_m S(k, m) m! C(x, m)`.
    pub fn moment(&self, k: usize) -> Result<PadicElement> {
        let ring = self.lambda.ring();
        let l = self.lambda.len();
        if k >= l {
            return Err(Error::TruncationInsufficient {
                m: l,
                why: format!("moment of degree {k} needs at least {} coefficients", k + 1),
            });
        }
        let pn = ring.pn();
        let s2 = stirling2_table(pn, k);
        let fact = factorial_table(pn, k);
        let mut acc = ring.zero();
        for m in 0..=k {
            let c = mulm(s2[k][m], fact[m], pn);
            if c != 0 {
                acc = acc.add(&self.lambda.coeff(m).mul_scalar(c));
            }
        }
        Ok(acc)
    }

    /// Projection onto the measures supported on `Z_p^*`:
    /// `lambda -> (1 - phi psi) lambda`.  The output length shrinks to the
    /// window where the truncated `psi` is informative, and every
    /// coefficient is capped by its [`psi_tail_bound`].
    pub fn restrict(&self) -> Result<AmiceMeasure> {
        let ring = self.lambda.ring().clone();
        let p = ring.p();
        let l = self.lambda.len();
        let psil = psi_operator(&self.lambda)?;
        let out_len = psil.len();
        let phipsi = phi_operator(&psil, out_len);
        let mut out = self.lambda.truncate_len(out_len).sub(&phipsi);
        let coeffs = out.coeffs_mut();
        let mut keep = 0usize;
        for (i, c) in coeffs.iter_mut().enumerate() {
            let cap = psi_tail_bound(l, p, i);
            *c = c.truncated(cap.min(c.precision()));
            if cap > 0 {
                keep = i + 1;
            }
        }
        if keep == 0 {
            return Err(Error::TruncationInsufficient {
                m: l,
                why: "restriction to the units retains no informative coefficients".into(),
            });
        }
        Ok(AmiceMeasure {
            lambda: out.truncate_len(keep),
            restricted: true,
        })
    }

    pub fn descriptor(&self) -> AmiceMeasureDescriptor {
        AmiceMeasureDescriptor {
            kind: "amice".into(),
            ring: self.lambda.ring().descriptor(),
            restricted: self.restricted,
            coeffs: self.lambda.coeffs().iter().map(|c| c.descriptor()).collect(),
        }
    }

    pub fn from_descriptor(desc: &AmiceMeasureDescriptor) -> Result<AmiceMeasure> {
        if desc.kind != "amice" {
            return Err(Error::Internal(format!(
                "descriptor kind {:?} is not an amice measure",
                desc.kind
            )));
        }
        let ring = desc.ring.build()?;
        let coeffs: Result<Vec<PadicElement>> = desc
            .coeffs
            .iter()
            .map(|d| PadicElement::from_descriptor(&ring, d))
            .collect();
        Ok(AmiceMeasure {
            lambda: TruncatedSeries::new(&ring, coeffs?),
            restricted: desc.restricted,
        })
    }
}

/// The measure of a norm-coherent unit tower: the Amice transform is
/// `lambda = (1 - phi/p) log g`, computed integrally from
/// `q = g^p / phi(g)` (a series congruent to `1` mod `p`).
///
/// Norm coherence is verified on the way out: `psi(lambda)` must vanish on
/// every coefficient its truncation determines, and the first violation is
/// reported as [`Error::NormIdentity`].  The result is marked restricted —
/// for `f > 1` the tower measure is genuinely supported on the units.
pub fn measure_from_tower(g: &ColemanSeries) -> Result<AmiceMeasure> {
    coherent_measure(g.series())
}

/// Shared core of [`measure_from_tower`] and the alpha pipeline: the
/// measure of any series satisfying the norm-coherence identity
/// `prod_zeta s(zeta(1+T) - 1) = phi(s)`.  The coherence check is done on
/// `psi(lambda)` so the stored transform keeps full precision.
fn coherent_measure(s: &TruncatedSeries) -> Result<AmiceMeasure> {
    let ring = s.ring().clone();
    let p = ring.p();
    let l = s.len();
    if l < p as usize {
        return Err(Error::TruncationInsufficient {
            m: l,
            why: format!("tower measures need at least p = {p} coefficients"),
        });
    }
    if s.coeff(0).valuation() != Some(0) {
        return Err(Error::NonUnit);
    }
    let q = pow_series(s, p).mul(&phi_operator(s, l).inverse()?);
    let lambda = one_unit_log_over_p(&q)?;

    let psil = psi_operator(&lambda)?;
    for (j, c) in psil.coeffs().iter().enumerate() {
        let bound = psi_tail_bound(l, p, j);
        if bound == 0 {
            break;
        }
        if !c.truncated(bound.min(c.precision())).is_zero() {
            return Err(Error::NormIdentity { index: j });
        }
    }
    Ok(AmiceMeasure {
        lambda,
        restricted: true,
    })
}

/// A series length making the degree-`digits` moment window of a tower
/// measure fully informative: `psi_tail_bound` stays at least `digits` out
/// to the index where the Gamma-transform's own tail estimate takes over.
pub fn measure_length(p: u64, digits: u32) -> usize {
    let pm1 = (p - 1) as usize;
    let d = digits.max(1) as usize;
    let mut istar = 1usize;
    while istar - (istar - 1) / pm1 < d {
        istar += 1;
    }
    p as usize * istar + (d + 1) * pm1 + p as usize
}

// ---------------------------------------------------------------------------
// Stirling tables.
// ---------------------------------------------------------------------------

/// Stirling numbers of the second kind `S(k, m)` mod `pn`, rows `0..=kmax`.
fn stirling2_table(pn: u64, kmax: usize) -> Vec<Vec<u64>> {
    let mut t: Vec<Vec<u64>> = Vec::with_capacity(kmax + 1);
    t.push(vec![1]);
    for k in 1..=kmax {
        let mut row = vec![0u64; k + 1];
        for m in 1..=k {
            let up = if m <= k - 1 { t[k - 1][m] } else { 0 };
            row[m] = addm(mulm(m as u64 % pn, up, pn), t[k - 1][m - 1], pn);
        }
        t.push(row);
    }
    t
}

fn factorial_table(pn: u64, kmax: usize) -> Vec<u64> {
    let mut f = vec![1u64; kmax + 1];
    for k in 1..=kmax {
        f[k] = mulm(f[k - 1], k as u64 % pn, pn);
    }
    f
}

/// Signed Stirling numbers of the first kind `s(i, k)` for `i <= imax`,
/// truncated to the first `cols` columns:
/// `x(x-1)...(x-i+1) = sum_k s(i, k) x^k`.
fn stirling1_rows(imax: usize, cols: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(imax + 1);
    rows.push(vec![BigInt::from(1)]);
    for i in 1..=imax {
        rows.push(stirling1_next(&rows[i - 1], i, cols));
    }
    rows
}

/// Row `i` of the signed Stirling triangle from row `i - 1`:
/// `s(i, k) = s(i-1, k-1) - (i-1) s(i-1, k)`.
fn stirling1_next(prev: &[BigInt], i: usize, cols: usize) -> Vec<BigInt> {
    let width = (i + 1).min(cols.max(1));
    let mut row = vec![BigInt::from(0); width];
    let im1 = BigInt::from(i as u64 - 1);
    for (k, slot) in row.iter_mut().enumerate() {
        let diag = if k >= 1 && k - 1 < prev.len() {
            prev[k - 1].clone()
        } else {
            BigInt::from(0)
        };
        let up = if k < prev.len() {
            &prev[k] * &im1
        } else {
            BigInt::from(0)
        };
        *slot = diag - up;
    }
    row
}

// ---------------------------------------------------------------------------
// The Gamma-transform.
// ---------------------------------------------------------------------------

/// The Gamma-transform of a measure supported on `Z_p^*`: the series `F`
/// with `F((1+p)^s - 1) = integral of omega^j(x) <x>^s dmu(x)`, truncated
/// to `out_len` coefficients.
///
/// Per unit disc `u + pZ_p` the pipeline is exact linear algebra: restrict
/// (`(1+T)^u phi(psi((1+T)^{-u} lambda))`), form power moments through
/// Stirling numbers of the second kind, remove the Teichmueller part of the
/// variable, convert to moments of `log<x>/log(1+p)` through the exact
/// rational table `k! s(i, k)/i!`, and assemble binomial coefficients of
/// the Mahler variable.  Every coefficient of the result carries the
/// precision that survives the truncation-tail and series-tail estimates;
/// a degree whose precision would be vacuous is reported as
/// [`Error::MomentPrecision`].
pub fn gamma_transform(
    mu: &AmiceMeasure,
    j: u64,
    out_len: usize,
) -> Result<TruncatedSeries> {
    if !mu.restricted {
        return Err(Error::Internal(
            "the Gamma-transform needs a measure restricted to the units".into(),
        ));
    }
    let lambda = &mu.lambda;
    let ring = lambda.ring().clone();
    let p = ring.p();
    let pu = p as usize;
    let pn = ring.pn();
    let n = ring.precision();
    let l = lambda.len();
    let out_len = out_len.max(1);
    if out_len > MAX_GAMMA_LEN {
        return Err(Error::Internal(format!(
            "Gamma-transform length {out_len} exceeds the exact-assembly cap {MAX_GAMMA_LEN}"
        )));
    }
    if l < pu {
        return Err(Error::TruncationInsufficient {
            m: l,
            why: format!("the Gamma-transform needs at least p = {p} coefficients"),
        });
    }

    // Largest moment degree the truncation can say anything about.
    let jcap = (l - 1) / pu;
    let mut imax = 0usize;
    for i in 0..=jcap {
        if psi_tail_bound(l, p, i) >= 1 {
            imax = i;
        } else {
            break;
        }
    }
    if imax + 1 < out_len {
        return Err(Error::MomentPrecision {
            degree: out_len - 1,
            bound: psi_tail_bound(l, p, out_len - 1) as i64,
        });
    }

    let s2 = stirling2_table(pn, imax);
    let fact = factorial_table(pn, imax);
    let mut pascal: Vec<Vec<u64>> = Vec::with_capacity(imax + 1);
    for i in 0..=imax {
        let mut row = vec![0u64; i + 1];
        row[0] = 1;
        if i > 0 {
            for m in 1..=i {
                let up = if m <= i - 1 { pascal[i - 1][m] } else { 0 };
                row[m] = addm(up, pascal[i - 1][m - 1], pn);
            }
        }
        pascal.push(row);
    }

    // log(1+p) = p * u_log with u_log a unit; computed with spare digits so
    // the logarithm's own tail does not eat into the caller's precision.
    let u_log = {
        let lifted = boosted_ring(&ring, GAMMA_BOOST)?;
        lower_elem(
            &ring,
            &lifted.from_u64(p + 1).iwasawa_log()?.rescale_down(1)?,
        )
    };
    let u_log_inv = u_log.inverse()?;

    // Exact rational table c_i^{(k)} = k! s(i, k) / i! for the expansion
    // (log(1+w))^k = k! sum_i s(i, k) w^i / i!.
    let s1 = stirling1_rows(imax, out_len);
    let factorial_big = |m: usize| -> BigInt {
        let mut acc = BigInt::from(1);
        for v in 2..=m {
            acc *= BigInt::from(v as u64);
        }
        acc
    };

    // Per disc: ell-moments of log<x>/log(1+p) as scaled values.
    let mut ell: Vec<Vec<PadicScaled>> = Vec::with_capacity(pu - 1);
    for u in 1..p {
        let twist = lambda.mul(&TruncatedSeries::one_plus_t_pow_i64(
            &ring,
            -(u as i64),
            l,
        ));
        let psit = psi_operator(&twist)?;
        let lam_u_raw = phi_operator(&psit, imax + 1).mul(
            &TruncatedSeries::one_plus_t_pow_i64(&ring, u as i64, imax + 1),
        );
        let mut lam_u = lam_u_raw;
        for (i, c) in lam_u.coeffs_mut().iter_mut().enumerate() {
            let cap = psi_tail_bound(l, p, i);
            *c = c.truncated(cap.min(c.precision()));
        }

        // Power moments X_i = integral of x^i over the disc.
        let mut x: Vec<PadicElement> = Vec::with_capacity(imax + 1);
        for i in 0..=imax {
            let mut acc = ring.zero();
            for m in 0..=i {
                let c = mulm(s2[i][m], fact[m], pn);
                if c != 0 {
                    acc = acc.add(&lam_u.coeff(m).mul_scalar(c));
                }
            }
            x.push(acc);
        }
        // Remove the Teichmueller part: Y_i = omega(u)^{-i} X_i.
        let om_inv = ring.from_u64(u).teichmuller()?.inverse()?;
        let mut y: Vec<PadicElement> = Vec::with_capacity(imax + 1);
        let mut om_pow = ring.one();
        for xi in &x {
            y.push(xi.mul(&om_pow));
            om_pow = om_pow.mul(&om_inv);
        }
        // Center at 1: Z_i = integral of (<x> - 1)^i, valuation >= i.
        let mut z: Vec<PadicElement> = Vec::with_capacity(imax + 1);
        for i in 0..=imax {
            let mut acc = ring.zero();
            for (k, yk) in y.iter().enumerate().take(i + 1) {
                let c = pascal[i][k];
                if c == 0 {
                    continue;
                }
                let s = if (i - k) % 2 == 1 { (pn - c) % pn } else { c };
                acc = acc.add(&yk.mul_scalar(s));
            }
            z.push(acc);
        }

        // ell-moments: integral of (log<x>)^k = sum_i c_i^{(k)} Z_i, then
        // divide by log(1+p)^k.  A term is included only while the Z-series
        // knows more digits than the term's guaranteed valuation; the rest
        // is folded into the precision as a tail bound.
        let mut row: Vec<PadicScaled> = Vec::with_capacity(out_len);
        for k in 0..out_len {
            if k == 0 {
                row.push(PadicScaled::from_elem(z[0].clone()));
                continue;
            }
            let kfac = factorial_big(k);
            let mut acc = PadicScaled::from_elem(ring.zero());
            let mut cut = imax + 1;
            for i in k..=imax {
                if u64::from(z[i].precision()) <= i as u64 {
                    cut = i;
                    break;
                }
                let c = BigRational::new(&kfac * &s1[i][k], factorial_big(i));
                let (ce, sh) = ring.from_rational_scaled(&c);
                acc = acc.add(&PadicScaled::new(ce.mul(&z[i]), sh));
            }
            // Tail bound: min over i >= cut of v_p(c_i) + i, extending the
            // Stirling rows until the a-priori growth dominates.
            let mut tail = i64::MAX;
            let mut prev = s1[imax].clone();
            let mut i = cut;
            loop {
                let a_priori = i as i64 - ((i as i64 - 1) / (p as i64 - 1));
                if a_priori >= tail || a_priori >= i64::from(n) + i64::from(GAMMA_BOOST) {
                    break;
                }
                let rowi = if i <= imax {
                    s1[i].clone()
                } else {
                    stirling1_next(&prev, i, out_len)
                };
                if k < rowi.len() && !rowi[k].is_zero() {
                    let c = BigRational::new(&kfac * &rowi[k], factorial_big(i));
                    tail = tail.min(rational_vp(&c, p) + i as i64);
                }
                prev = rowi;
                i += 1;
            }
            let capped_prec =
                (tail + i64::from(acc.shift())).clamp(0, i64::from(acc.num().precision())) as u32;
            let acc = PadicScaled::new(acc.num().truncated(capped_prec), acc.shift());
            // Divide by log(1+p)^k = (p u_log)^k.
            let mut num = acc.num().clone();
            for _ in 0..k {
                num = num.mul(&u_log_inv);
            }
            row.push(PadicScaled::new(num, acc.shift() + k as u32));
        }
        ell.push(row);
    }

    // L_k = sum_u omega(u)^j ell_k(u), then Mahler assembly
    // B_m = (1/m!) sum_k s(m, k) L_k.
    let jred = j % (p - 1);
    let mut lk: Vec<PadicScaled> = Vec::with_capacity(out_len);
    for k in 0..out_len {
        let mut acc = PadicScaled::from_elem(ring.zero());
        for u in 1..p {
            let om = ring.from_u64(u).teichmuller()?.pow_u64(jred);
            acc = acc.add(&ell[(u - 1) as usize][k].mul_elem(&om));
        }
        lk.push(acc);
    }
    let mut out: Vec<PadicElement> = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let mut acc = PadicScaled::from_elem(ring.zero());
        for (k, lkk) in lk.iter().enumerate().take(m + 1) {
            let s: i64 = i64::try_from(&s1[m][k]).expect("Stirling scalar fits i64 below the length cap");
            if s != 0 {
                acc = acc.add(&PadicScaled::new(lkk.num().mul_scalar_i64(s), lkk.shift()));
            }
        }
        let mfac: u64 = (1..=m.max(1) as u64).product();
        let acc = acc.div_exact_u64(mfac)?;
        let elem = acc
            .unscale()
            .map_err(|_| Error::MomentPrecision {
                degree: m,
                bound: acc.abs_prec(),
            })?;
        if elem.precision() == 0 {
            return Err(Error::MomentPrecision {
                degree: m,
                bound: 0,
            });
        }
        out.push(elem);
    }
    Ok(TruncatedSeries::new(&ring, out))
}

// ---------------------------------------------------------------------------
// Comparison against the Kubota-Leopoldt branch series.
// ---------------------------------------------------------------------------

/// The normalization constant relating the two pipelines: the
/// Gamma-transform of the `chi`-weighted tower measures equals
/// `kappa = -tau(chi^{-1})` times the branch series.  The constant is the
/// negated Gauss sum of the inverse character, embedded through the
/// Teichmueller-coherent roots of unity; it was pinned once numerically on
/// the quadratic character of conductor 8 at `p = 7` and is asserted on
/// every instance by [`coleman_vs_stickelberger`].
pub fn gauss_normalization(
    chi: &DirichletCharacter,
    ring: &UnramifiedWitnessRing,
) -> Result<PadicElement> {
    Ok(embed_cyc(ring, &chi.inverse().gauss_sum_exact())?.neg())
}

/// Outcome of running both pipelines on one branch.
#[derive(Clone, Debug)]
pub struct ColemanComparison {
    /// `j = 0` Gamma-transform of the `chi^{-1}`-weighted tower measures.
    pub gamma_side: TruncatedSeries,
    /// Branch series scaled by the normalization constant.
    pub stickelberger_side: TruncatedSeries,
    /// The constant `kappa = -tau(chi^{-1})`.
    pub normalization: PadicElement,
    /// Coefficientwise agreement exponent of the two sides.
    pub agreement: u32,
}

impl ColemanComparison {
    /// Evaluate both sides at the argument `(1+p)^{1-s} - 1` used by the
    /// branch series, returning the two values and their agreement.
    pub fn sample(&self, s: i64) -> Result<(PadicElement, PadicElement, u32)> {
        let ring = self.gamma_side.ring();
        let t = sample_argument(ring, s);
        let a = self.gamma_side.eval_at(&t)?;
        let b = self.stickelberger_side.eval_at(&t)?;
        let agree = a.agreement_exponent(&b);
        Ok((a, b, agree))
    }
}

fn sample_argument(ring: &UnramifiedWitnessRing, s: i64) -> PadicElement {
    // (1+p)^{1-s} - 1, with the exponent reduced mod the order p^{N-1} of
    // 1+p in (Z/p^N)^*.
    let ord = checked_pow(ring.p(), ring.precision().saturating_sub(1), u64::MAX)
        .expect("p^{N-1} < p^N < 2^63");
    let e = (1 - s).rem_euclid(ord as i64) as u64;
    ring.from_u64(ring.p() + 1).pow_u64(e).sub(&ring.one())
}

/// Digitwise reduction to a lower-precision ring with the same
/// `(p, orders, salt)`; coherent Teichmueller moduli make this the
/// canonical projection.
fn lower_elem(target: &UnramifiedWitnessRing, e: &PadicElement) -> PadicElement {
    let prec = e.precision().min(target.precision());
    let pn = target.pn();
    target
        .from_coeffs(e.coeffs().iter().map(|&c| c % pn).collect(), prec)
        .expect("same modulus shape")
}

fn lower_series(target: &UnramifiedWitnessRing, s: &TruncatedSeries) -> TruncatedSeries {
    TruncatedSeries::new(
        target,
        s.coeffs().iter().map(|c| lower_elem(target, c)).collect(),
    )
}

fn boosted_ring(ring: &UnramifiedWitnessRing, extra: u32) -> Result<UnramifiedWitnessRing> {
    let n = (ring.precision() + extra).min(max_precision(ring.p()));
    if n <= ring.precision() {
        return Ok(ring.clone());
    }
    UnramifiedWitnessRing::build_with_salt(ring.p(), n, ring.orders(), ring.salt())
}

fn require_split(chi: &DirichletCharacter, ring: &UnramifiedWitnessRing) -> Result<()> {
    require_even_tame(chi, ring)?;
    if chi.value_exponent(ring.p()) != Some(0) {
        return Err(Error::NotSplit);
    }
    Ok(())
}

/// Run both constructions of the even split branch and compare:
/// the Gamma-transform of `sum_a chi^{-1}(a) mu_a` over the conductor-`f`
/// towers against `kappa` times the Stickelberger-built branch series, to
/// `m_len` coefficients with the branch computed at tower level `level`.
///
/// The towers are processed in parallel and combined in ascending order of
/// `a`, so the output is independent of the worker count.  All internal
/// arithmetic runs at a boosted precision and is reduced back to the
/// caller's ring at the end.
pub fn coleman_vs_stickelberger(
    chi: &DirichletCharacter,
    ring: &UnramifiedWitnessRing,
    level: u32,
    m_len: usize,
) -> Result<ColemanComparison> {
    require_split(chi, ring)?;
    let f = chi.conductor();
    let work = boosted_ring(ring, GAMMA_BOOST)?;
    let l = measure_length(work.p(), work.precision());

    let indices: Vec<u64> = (1..f).filter(|a| gcd(*a, f) == 1).collect();
    let measures: Result<Vec<AmiceMeasure>> = indices
        .par_iter()
        .map(|&a| measure_from_tower(&tower_series(&work, f, a, l)?))
        .collect();
    let measures = measures?;

    let chi_inv = chi.inverse();
    let mut combined = AmiceMeasure {
        lambda: TruncatedSeries::zero(&work, l),
        restricted: true,
    };
    for (a, mu) in indices.iter().zip(&measures) {
        combined = combined.add(&mu.mul_elem(&chi_inv.evaluate_ring(*a, &work)?));
    }

    let gamma = gamma_transform(&combined, 0, m_len)?;
    let branch = build_series(&work, chi, 0, level, m_len)?;
    let kappa = gauss_normalization(chi, &work)?;
    let scaled = branch.series().mul_elem(&kappa);

    let gamma_side = lower_series(ring, &gamma);
    let stickelberger_side = lower_series(ring, &scaled);
    let agreement = gamma_side.agreement_exponent(&stickelberger_side);
    Ok(ColemanComparison {
        gamma_side,
        stickelberger_side,
        normalization: lower_elem(ring, &kappa),
        agreement,
    })
}

// ---------------------------------------------------------------------------
// The alpha-coordinate at the split place.
// ---------------------------------------------------------------------------

/// The alpha-coordinate at the split place `v_0` above `p`, with the
/// regularizer used to remove the singular factor.
///
/// The value has a simple pole worth of `p` in the denominator, so it is
/// returned as a scaled element (`value = num / p^shift`).
#[derive(Clone, Debug)]
pub struct AlphaValue {
    /// `alpha(v_0)`, normalized so that `S(chi) * alpha(v_0) = L_p(1, chi)`.
    pub value: PadicScaled,
    /// The character-free local factor `G(0)/log<c>`; equals `1 - 1/p`.
    pub local: PadicScaled,
    /// The regularizer `c` that was used.
    pub regularizer: u64,
}

/// Smallest odd `c >= 3` prime to `p` whose one-unit part generates
/// `1 + pZ_p`, i.e. `v_p(log c) = 1`.
fn removal_regularizer(ring: &UnramifiedWitnessRing) -> Result<u64> {
    let p = ring.p();
    let mut c = 3u64;
    while c < 3 + 2 * 300 {
        if c % p != 0 {
            let lg = ring.from_u64(c).iwasawa_log()?;
            if lg.valuation() == Some(1) {
                return Ok(c);
            }
        }
        c += 2;
    }
    Err(Error::NoAdmissibleRegularizer)
}

/// The alpha pipeline for a fixed regularizer, on the working ring.
///
/// The regularized uniformizer tower has Coleman series
/// `h(T) = ((1+T)^c - 1)/T` (integer binomial coefficients `C(c, i+1)`),
/// which satisfies the norm-coherence identity exactly, so its measure is
/// supported on the units; the total mass is `G(0) = (1 - 1/p) log c`, and
/// dividing by `log<c>` removes the regularization exactly.
fn alpha_local(ring: &UnramifiedWitnessRing, c: u64) -> Result<PadicScaled> {
    let p = ring.p();
    let n = ring.precision();
    let logc = ring.from_u64(c).iwasawa_log()?;
    if logc.valuation() != Some(1) {
        return Err(Error::RemovalFactorNotUnit { c });
    }

    let l = measure_length(p, n);
    let full = TruncatedSeries::one_plus_t_pow_i64(ring, c as i64, l + 1);
    let mut coeffs = Vec::with_capacity(l);
    for i in 0..l {
        coeffs.push(full.coeff(i + 1).clone());
    }
    let h = TruncatedSeries::new(ring, coeffs);

    let mu = coherent_measure(&h)?;
    let g0 = gamma_transform(&mu, 0, 1)?.coeff(0).clone();

    let u_c = logc.rescale_down(1)?;
    Ok(PadicScaled::new(g0.mul(&u_c.inverse()?), 1))
}

/// The alpha-coordinate at the split place for an even primitive `chi`
/// with `chi(p) = 1`: the Gamma-transform mass of the regularized
/// uniformizer tower, divided by the removal factor and by the
/// normalization constant of [`coleman_vs_stickelberger`].
pub fn alpha_at_v0(
    chi: &DirichletCharacter,
    ring: &UnramifiedWitnessRing,
) -> Result<AlphaValue> {
    require_split(chi, ring)?;
    let work = boosted_ring(ring, GAMMA_BOOST)?;
    let c = removal_regularizer(&work)?;
    let local = alpha_local(&work, c)?;
    let kappa_inv = gauss_normalization(chi, &work)?.inverse()?;
    let value = PadicScaled::new(local.num().mul(&kappa_inv), local.shift());
    Ok(AlphaValue {
        value: PadicScaled::new(lower_elem(ring, value.num()), value.shift()),
        local: PadicScaled::new(lower_elem(ring, local.num()), local.shift()),
        regularizer: c,
    })
}
