//! Exact arithmetic in cyclotomic fields over the rationals.
//!
//! [`CycRational`] represents an element of `Q(zeta_n) = Q[x]/Phi_n(x)` as a
//! polynomial of degree `< phi(n)` with [`BigRational`] coefficients — a
//! canonical form, so equality is coefficient equality (after promoting both
//! operands into the compositum when their levels differ).  These exact
//! values serve as independent oracles for the mod-`p^N` computations: Gauss
//! sums, generalized Bernoulli numbers, Stickelberger coefficients and
//! norm-compatibility identities are all first established here and only
//! then compared against their p-adic images.
//!
//! Also provided: cyclotomic polynomials `Phi_n` over `Z`, Bernoulli numbers
//! in the `B_1 = -1/2` normalization, Bernoulli polynomials, and exact
//! binomial coefficients.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut f = 2;
    while f * f <= m {
        if m % f == 0 {
            result = result / f * (f - 1);
            while m % f == 0 {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        result = result / m * (m - 1);
    }
    result
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// The cyclotomic polynomial `Phi_n` as ascending integer coefficients
/// (degree `phi(n)`), by exact division of `x^n - 1` by all `Phi_d`,
/// `d | n`, `d < n`.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    fn compute(n: u64, memo: &mut HashMap<u64, Vec<BigInt>>) -> Vec<BigInt> {
        if let Some(v) = memo.get(&n) {
            return v.clone();
        }
        // x^n - 1
        let mut num = vec![BigInt::zero(); n as usize + 1];
        num[0] = BigInt::from(-1);
        num[n as usize] = BigInt::one();
        for d in 1..n {
            if n % d == 0 {
                let phi_d = compute(d, memo);
                num = exact_poly_div(&num, &phi_d);
            }
        }
        memo.insert(n, num.clone());
        num
    }
    let mut memo = HashMap::new();
    memo.insert(1, vec![BigInt::from(-1), BigInt::one()]);
    compute(n, &mut memo)
}

/// Exact division of integer polynomials (panics if the division is not
/// exact; only used with known-divisible cyclotomic factors).
fn exact_poly_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(dn >= dd);
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for i in (0..=dn - dd).rev() {
        let c = rem[i + dd].clone() / den[dd].clone();
        quot[i] = c.clone();
        for (k, dk) in den.iter().enumerate() {
            let t = dk * &c;
            rem[i + k] -= t;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
    quot
}

/// Bernoulli numbers `B_0..B_kmax` with `B_1 = -1/2`, via the defining
/// recurrence `sum_{j<=m} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(k_max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(k_max + 1);
    b.push(BigRational::one());
    for m in 1..=k_max {
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from(binomial(m as u64 + 1, j as u64)) * bj;
        }
        let coef = BigRational::from(BigInt::from(m as u64 + 1));
        b.push(-acc / coef);
    }
    b
}

/// The Bernoulli polynomial value `B_k(x) = sum_i C(k, i) B_i x^{k-i}`.
pub fn bernoulli_poly_at(k: u64, x: &BigRational, bernoulli: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    let mut xpow = BigRational::one();
    // iterate i = k down to 0 so xpow tracks x^{k-i}
    for i in (0..=k).rev() {
        acc += BigRational::from(binomial(k, i)) * &bernoulli[i as usize] * &xpow;
        xpow *= x;
    }
    acc
}

/// An element of `Q(zeta_n)`, stored reduced mod `Phi_n` (degree `< phi(n)`).
#[derive(Clone)]
pub struct CycRational {
    n: u64,
    coeffs: Vec<BigRational>,
}

impl CycRational {
    pub fn zero(n: u64) -> Self {
        CycRational {
            n,
            coeffs: vec![BigRational::zero(); euler_phi(n) as usize],
        }
    }

    pub fn one(n: u64) -> Self {
        Self::from_rational(n, BigRational::one())
    }

    pub fn from_rational(n: u64, r: BigRational) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = r;
        z
    }

    pub fn from_integer(n: u64, v: i64) -> Self {
        Self::from_rational(n, BigRational::from(BigInt::from(v)))
    }

    /// `zeta_n^k` (k taken mod n).
    pub fn zeta_pow(n: u64, k: u64) -> Self {
        let k = (k % n) as usize;
        let mut raw = vec![BigRational::zero(); k + 1];
        raw[k] = BigRational::one();
        Self::reduce(n, raw)
    }

    fn reduce(n: u64, mut raw: Vec<BigRational>) -> Self {
        let phi_n: Vec<BigRational> = cyclotomic_polynomial(n)
            .into_iter()
            .map(BigRational::from)
            .collect();
        let deg = phi_n.len() - 1;
        if raw.len() < deg {
            raw.resize(deg, BigRational::zero());
        }
        for i in (deg..raw.len()).rev() {
            if raw[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut raw[i], BigRational::zero());
            for (k, pk) in phi_n.iter().enumerate().take(deg) {
                let t = pk * &c;
                raw[i - deg + k] -= t;
            }
        }
        raw.truncate(deg);
        CycRational { n, coeffs: raw }
    }

    pub fn level(&self) -> u64 {
        self.n
    }
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The rational number this element equals, if it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-express in `Q(zeta_m)` for `n | m`.
    pub fn promote(&self, m: u64) -> Self {
        assert!(m % self.n == 0, "promotion target must be a multiple level");
        if m == self.n {
            return self.clone();
        }
        let step = (m / self.n) as usize;
        let mut raw = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            raw[i * step] = c.clone();
        }
        Self::reduce(m, raw)
    }

    fn joint(&self, other: &Self) -> (Self, Self) {
        let m = num_integer::lcm(self.n, other.n);
        (self.promote(m), other.promote(m))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = self.joint(other);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycRational {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.joint(other);
        let mut raw = vec![BigRational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    let t = x * y;
                    raw[i + j] += t;
                }
            }
        }
        Self::reduce(a.n, raw)
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        CycRational {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// The Galois action `zeta_n -> zeta_n^s` (requires `gcd(s, n) = 1`).
    pub fn galois(&self, s: u64) -> Self {
        assert_eq!(s.gcd(&self.n), 1, "Galois exponent must be prime to the level");
        let mut acc = Self::zero(self.n);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let term = Self::zeta_pow(self.n, (i as u64 * s) % self.n).mul_rational(c);
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Self {
        if self.n == 1 {
            return self.clone();
        }
        self.galois(self.n - 1)
    }
}

impl PartialEq for CycRational {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.joint(other);
        a.coeffs == b.coeffs
    }
}
impl Eq for CycRational {}

impl fmt::Debug for CycRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})*z{}^{i}", self.n)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
