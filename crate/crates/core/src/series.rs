//! Truncated power series over an unramified coefficient ring.
//!
//! A [`TruncatedSeries`] is a polynomial representative of a power series
//! modulo `T^L`; the length `L` is part of the value and shrinks under
//! arithmetic like precision does (products and compositions are valid to
//! the minimum of the operand lengths).  Each coefficient is a
//! [`PadicElement`] carrying its own p-adic precision, so a series tracks a
//! full rectangle of guaranteed digits: coefficient `m` is known mod
//! `p^{prec_m}` and degrees `>= L` are unknown.
//!
//! Evaluation at a point `t` with `v_p(t) >= 1` converts the rectangle into
//! an absolute precision for the value: term `m` contributes an error of at
//! most `p^{prec_m + m v_p(t)}`, the discarded tail contributes
//! `p^{L v_p(t)}`, and the point's own uncertainty contributes
//! `p^{prec(t)}`; the reported precision is the minimum of these and `N`.
//!
//! The logarithm of a 1-unit series is computed through
//! `log h = integral of h'/h`, which introduces the denominators `1/m`; the
//! result is returned as `(series, shift)` with the series equal to
//! `p^shift log h` and `shift = floor(log_p(L - 1))` covering the worst
//! denominator.

use crate::error::{Error, Result};
use crate::ring::{PadicElement, UnramifiedWitnessRing};
use num_bigint::BigInt;

/// A power series representative modulo `T^len`, coefficients in one ring.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    ring: UnramifiedWitnessRing,
    coeffs: Vec<PadicElement>,
}

impl TruncatedSeries {
    pub fn new(ring: &UnramifiedWitnessRing, coeffs: Vec<PadicElement>) -> Self {
        assert!(!coeffs.is_empty(), "series needs length >= 1");
        for c in &coeffs {
            assert!(c.ring().same_ring(ring), "coefficient from a foreign ring");
        }
        TruncatedSeries {
            ring: ring.clone(),
            coeffs,
        }
    }

    pub fn zero(ring: &UnramifiedWitnessRing, len: usize) -> Self {
        Self::new(ring, vec![ring.zero(); len.max(1)])
    }

    pub fn one(ring: &UnramifiedWitnessRing, len: usize) -> Self {
        let mut s = Self::zero(ring, len);
        s.coeffs[0] = ring.one();
        s
    }

    /// The monomial `T` (requires `len >= 2`).
    pub fn t(ring: &UnramifiedWitnessRing, len: usize) -> Self {
        assert!(len >= 2);
        let mut s = Self::zero(ring, len);
        s.coeffs[1] = ring.one();
        s
    }

    pub fn from_u64_coeffs(ring: &UnramifiedWitnessRing, coeffs: &[u64]) -> Self {
        Self::new(ring, coeffs.iter().map(|&c| ring.from_u64(c)).collect())
    }

    pub fn ring(&self) -> &UnramifiedWitnessRing {
        &self.ring
    }
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn coeff(&self, m: usize) -> &PadicElement {
        &self.coeffs[m]
    }
    pub fn coeffs(&self) -> &[PadicElement] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [PadicElement] {
        &mut self.coeffs
    }

    /// Shorten to `len` coefficients (a strictly weaker statement).
    pub fn truncate_len(&self, len: usize) -> Self {
        let len = len.max(1).min(self.coeffs.len());
        Self::new(&self.ring, self.coeffs[..len].to_vec())
    }

    /// T-adic valuation: index of the first coefficient that is nonzero at
    /// its stated precision (`None` if all vanish).
    pub fn t_valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn common_len(&self, other: &Self) -> usize {
        self.coeffs.len().min(other.coeffs.len())
    }

    pub fn add(&self, other: &Self) -> Self {
        let l = self.common_len(other);
        Self::new(
            &self.ring,
            (0..l).map(|m| self.coeffs[m].add(&other.coeffs[m])).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let l = self.common_len(other);
        Self::new(
            &self.ring,
            (0..l).map(|m| self.coeffs[m].sub(&other.coeffs[m])).collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.ring, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let l = self.common_len(other);
        let mut out = vec![self.ring.zero(); l];
        for (i, a) in self.coeffs.iter().enumerate().take(l) {
            if a.is_zero() && a.precision() >= self.ring.precision() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= l {
                    break;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(&self.ring, out)
    }

    pub fn mul_elem(&self, s: &PadicElement) -> Self {
        Self::new(&self.ring, self.coeffs.iter().map(|c| c.mul(s)).collect())
    }

    pub fn mul_scalar_i64(&self, s: i64) -> Self {
        Self::new(
            &self.ring,
            self.coeffs.iter().map(|c| c.mul_scalar_i64(s)).collect(),
        )
    }

    /// Multiply by `T^k` (coefficients shift up; length preserved, so the
    /// top `k` coefficients fall off).
    pub fn mul_t_pow(&self, k: usize) -> Self {
        let l = self.coeffs.len();
        let mut out = vec![self.ring.zero(); l];
        for m in 0..l.saturating_sub(k) {
            out[m + k] = self.coeffs[m].clone();
        }
        Self::new(&self.ring, out)
    }

    /// Multiplicative inverse; the constant term must be a unit.  Direct
    /// recurrence `b_m = -a_0^{-1} sum_{k=1..m} a_k b_{m-k}`.
    pub fn inverse(&self) -> Result<Self> {
        let a0_inv = self.coeffs[0].inverse()?;
        let l = self.coeffs.len();
        let mut b = Vec::with_capacity(l);
        b.push(a0_inv.clone());
        for m in 1..l {
            let mut acc = self.ring.zero();
            for k in 1..=m {
                acc = acc.add(&self.coeffs[k].mul(&b[m - k]));
            }
            b.push(acc.neg().mul(&a0_inv));
        }
        Ok(Self::new(&self.ring, b))
    }

    /// Substitute `g` into `self`; requires `g(0) = 0` so the result is
    /// again a truncated series (length = min of the two lengths).  When the
    /// constant term of `g` vanishes only to limited precision, the result's
    /// coefficients are capped at that precision.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if !g.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let cap = g.coeffs[0].precision();
        let l = self.common_len(g);
        let gl = g.truncate_len(l);
        let mut acc = Self::zero(&self.ring, l);
        for a in self.coeffs.iter().take(l).rev() {
            acc = acc.mul(&gl);
            acc.coeffs[0] = acc.coeffs[0].add(a);
        }
        if cap < self.ring.precision() {
            for c in &mut acc.coeffs {
                *c = c.truncated(cap);
            }
        }
        Ok(acc)
    }

    /// Formal derivative `d/dT` (length drops by one).
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(&self.ring, 1);
        }
        Self::new(
            &self.ring,
            (1..self.coeffs.len())
                .map(|m| self.coeffs[m].mul_scalar(m as u64))
                .collect(),
        )
    }

    /// The twisted derivative `(1 + T) d/dT` (the action of the Lie algebra
    /// of `Gamma` on the Iwasawa variable; length drops by one).
    pub fn twisted_derivative(&self) -> Self {
        let d = self.derivative();
        let l = d.coeffs.len();
        let mut out = d.coeffs.clone();
        for m in 1..l {
            out[m] = out[m].add(&d.coeffs[m - 1]);
        }
        Self::new(&self.ring, out)
    }

    /// `p^shift * log(self)` for a series with constant term 1 (to its
    /// stated precision), via `log h = integral h'/h`; returns the scaled
    /// series and the shift `floor(log_p(L - 1))` that clears every `1/m`
    /// denominator.
    pub fn log_scaled(&self) -> Result<(Self, u32)> {
        let c0 = &self.coeffs[0];
        if c0.precision() == 0 || !c0.sub(&self.ring.one()).is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let l = self.coeffs.len();
        let p = self.ring.p();
        let mut shift = 0u32;
        {
            let mut t = 1u64;
            while t * p <= (l as u64 - 1).max(1) {
                t *= p;
                shift += 1;
            }
        }
        if l == 1 {
            return Ok((Self::zero(&self.ring, 1), shift));
        }
        // h'/h has length l - 1; integrating restores length l.
        let ratio = self.derivative().mul(&self.inverse()?.truncate_len(l - 1));
        let mut out = vec![self.ring.zero(); l];
        for m in 1..l {
            let scaled = ratio.coeffs[m - 1].mul_p_pow(shift);
            out[m] = scaled.div_exact_u64(m as u64)?;
        }
        Ok((Self::new(&self.ring, out), shift))
    }

    /// The exact binomial series `(1 + T)^r` for any integer `r` (negative
    /// exponents give the honest integral coefficients `C(r, i)`).
    pub fn one_plus_t_pow_i64(ring: &UnramifiedWitnessRing, r: i64, len: usize) -> Self {
        let mut coeffs = Vec::with_capacity(len.max(1));
        let mut c = BigInt::from(1);
        coeffs.push(ring.from_bigint(&c));
        for i in 1..len.max(1) {
            // C(r, i) = C(r, i - 1) * (r - i + 1) / i, an exact division.
            c = c * BigInt::from(r - i as i64 + 1) / BigInt::from(i as i64);
            coeffs.push(ring.from_bigint(&c));
        }
        Self::new(ring, coeffs)
    }

    /// Apply Frobenius to every coefficient.
    pub fn frobenius(&self) -> Self {
        Self::new(&self.ring, self.coeffs.iter().map(|c| c.frobenius()).collect())
    }

    /// Evaluate at a point in the open unit disc (`v_p(t) >= 1`).
    ///
    /// The reported precision is
    /// `min(N, prec(t), L v, min_m (prec_m + m v))` with `v = v_p(t)`
    /// (taking `v = prec(t)` when `t` is zero to its precision).
    pub fn eval_at(&self, t: &PadicElement) -> Result<PadicElement> {
        assert!(t.ring().same_ring(&self.ring), "point from a foreign ring");
        if t.precision() == 0 {
            return Err(Error::NoPrecision);
        }
        let v = match t.valuation() {
            Some(0) => return Err(Error::EvaluationTail),
            Some(v) => v,
            None => t.precision(),
        };
        let n = self.ring.precision();
        let l = self.coeffs.len() as u64;
        let mut bound = u64::from(n)
            .min(l * u64::from(v))
            .min(u64::from(t.precision()));
        for (m, c) in self.coeffs.iter().enumerate() {
            bound = bound.min(u64::from(c.precision()) + m as u64 * u64::from(v));
        }
        // Exact Horner on the reduced representatives at full width; the
        // error analysis above justifies reporting `bound` digits.
        let t_full = self
            .ring
            .from_coeffs(t.coeffs().to_vec(), n)
            .expect("widening a reduced representative");
        let mut acc = self.ring.zero();
        for c in self.coeffs.iter().rev() {
            let c_full = self
                .ring
                .from_coeffs(c.coeffs().to_vec(), n)
                .expect("widening a reduced representative");
            acc = acc.mul(&t_full).add(&c_full);
        }
        Ok(acc.truncated(bound as u32))
    }

    /// Largest `e` such that the two series agree coefficientwise mod `p^e`
    /// up to degree `min(len) - 1` (capped by every coefficient's precision).
    pub fn agreement_exponent(&self, other: &Self) -> u32 {
        let l = self.common_len(other);
        (0..l)
            .map(|m| self.coeffs[m].agreement_exponent(&other.coeffs[m]))
            .min()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn ring(p: u64, n: u32) -> UnramifiedWitnessRing {
        UnramifiedWitnessRing::build(p, n, &[]).unwrap()
    }

    fn series_u64(r: &UnramifiedWitnessRing, c: &[u64]) -> TruncatedSeries {
        TruncatedSeries::from_u64_coeffs(r, c)
    }

    #[test]
    fn ring_ops() {
        let r = ring(7, 4);
        let a = series_u64(&r, &[1, 1, 0, 0, 0]); // 1 + T
        let sq = a.mul(&a);
        assert_eq!(sq, series_u64(&r, &[1, 2, 1, 0, 0]));
        let diff = sq.sub(&a);
        assert_eq!(diff, series_u64(&r, &[0, 1, 1, 0, 0]));
        let geo = series_u64(&r, &[1, 1, 1, 1, 1]);
        let one_minus_t = series_u64(&r, &[1, r.pn() - 1, 0, 0, 0]);
        assert_eq!(geo.mul(&one_minus_t), TruncatedSeries::one(&r, 5));
    }

    #[test]
    fn inverse_roundtrip() {
        let r = ring(5, 4);
        let a = series_u64(&r, &[2, 3, 1, 4, 0, 1]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), TruncatedSeries::one(&r, 6));
        assert!(series_u64(&r, &[5, 1]).inverse().is_err());
    }

    #[test]
    fn composition() {
        let r = ring(5, 4);
        // f = T^2, g = T + T^2: f(g) = T^2 + 2T^3 + T^4
        let f = series_u64(&r, &[0, 0, 1, 0, 0]);
        let g = series_u64(&r, &[0, 1, 1, 0, 0]);
        assert_eq!(f.compose(&g).unwrap(), series_u64(&r, &[0, 0, 1, 2, 1]));
        let bad = series_u64(&r, &[1, 1]);
        assert!(matches!(
            f.compose(&bad),
            Err(Error::NonzeroConstantTerm)
        ));
    }

    #[test]
    fn derivatives() {
        let r = ring(5, 4);
        let f = series_u64(&r, &[7, 3, 5, 2]); // 7 + 3T + 5T^2 + 2T^3
        assert_eq!(f.derivative(), series_u64(&r, &[3, 10, 6]));
        // (1+T) f' = 3 + 13T + 16T^2 truncated to len 3
        assert_eq!(f.twisted_derivative(), series_u64(&r, &[3, 13, 16]));
    }

    #[test]
    fn binomial_series() {
        let r = ring(7, 4);
        let pow_p = TruncatedSeries::one_plus_t_pow_i64(&r, 7, 8);
        assert_eq!(
            pow_p,
            series_u64(&r, &[1, 7, 21, 35, 35, 21, 7, 1])
        );
        let neg = TruncatedSeries::one_plus_t_pow_i64(&r, -3, 6);
        let pos = TruncatedSeries::one_plus_t_pow_i64(&r, 3, 6);
        assert_eq!(neg.mul(&pos), TruncatedSeries::one(&r, 6));
    }

    #[test]
    fn log_of_one_plus_t() {
        // p^1 * log(1+T) over p = 7, length 8: coefficients 7 (-1)^{m+1} / m.
        let r = ring(7, 5);
        let one_plus_t = series_u64(&r, &[1, 1, 0, 0, 0, 0, 0, 0]);
        let (lg, shift) = one_plus_t.log_scaled().unwrap();
        assert_eq!(shift, 1);
        assert!(lg.coeff(0).is_zero());
        for m in 1..8u64 {
            let expect = BigRational::new(
                BigInt::from(if m % 2 == 1 { 7 } else { -7 }),
                BigInt::from(m),
            );
            let (e, s) = r.from_rational_scaled(&expect);
            assert_eq!(s, 0);
            let got = lg.coeff(m as usize);
            assert!(got.eq_mod(&e, got.precision().min(e.precision())));
        }
        // The m = p coefficient genuinely lost one digit to the denominator.
        assert_eq!(lg.coeff(7).precision(), r.precision() - 1);
    }

    #[test]
    fn log_is_homomorphic() {
        let r = ring(5, 6);
        let a = series_u64(&r, &[1, 3, 2, 0, 1, 0, 0, 4, 0, 0]);
        let b = series_u64(&r, &[1, 1, 0, 2, 0, 0, 3, 0, 0, 1]);
        let (la, sa) = a.log_scaled().unwrap();
        let (lb, sb) = b.log_scaled().unwrap();
        let (lab, sab) = a.mul(&b).log_scaled().unwrap();
        assert_eq!(sa, sb);
        assert_eq!(sa, sab);
        let sum = la.add(&lb);
        let e = sum.agreement_exponent(&lab);
        let worst = sum
            .coeffs()
            .iter()
            .zip(lab.coeffs())
            .map(|(x, y)| x.precision().min(y.precision()))
            .min()
            .unwrap();
        assert!(e >= worst);
    }

    #[test]
    fn evaluation_geometric() {
        let r = ring(5, 4);
        let geo = series_u64(&r, &[1, 1, 1, 1, 1, 1]);
        let t = r.from_u64(5);
        let val = geo.eval_at(&t).unwrap();
        assert_eq!(val.precision(), 4); // min(N, L*v) = min(4, 6)
        // (1 - 5) * value = 1 mod 5^4
        assert_eq!(val.mul_scalar_i64(-4), r.one());
        assert!(matches!(
            geo.eval_at(&r.from_u64(2)),
            Err(Error::EvaluationTail)
        ));
        // evaluating at zero returns the constant term
        assert_eq!(geo.eval_at(&r.zero()).unwrap(), r.one());
    }

    #[test]
    fn evaluation_precision_rectangle() {
        let r = ring(5, 4);
        // a_1 known only mod 5^2: value at t = 5 known mod 5^{2 + 1} = 5^3.
        let mut s = TruncatedSeries::one(&r, 4);
        s.coeffs_mut()[1] = r.from_u64(3).truncated(2);
        let val = s.eval_at(&r.from_u64(5)).unwrap();
        assert_eq!(val.precision(), 3);
        assert_eq!(val, r.from_u64(16).truncated(3));
        // tail bound: length 2 series at v = 1 gives 2 digits
        let short = series_u64(&r, &[1, 1]);
        assert_eq!(short.eval_at(&r.from_u64(5)).unwrap().precision(), 2);
    }

    #[test]
    fn t_valuation_and_shift() {
        let r = ring(5, 3);
        let s = series_u64(&r, &[0, 0, 4, 1]);
        assert_eq!(s.t_valuation(), Some(2));
        assert_eq!(TruncatedSeries::zero(&r, 3).t_valuation(), None);
        let shifted = series_u64(&r, &[4, 1, 0, 0]).mul_t_pow(2);
        assert_eq!(shifted, s);
    }
}
