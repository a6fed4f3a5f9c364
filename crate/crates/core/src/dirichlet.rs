//! Dirichlet characters with deterministic enumeration and exact values.
//!
//! The unit group `(Z/f)^*` is presented by one generator per cyclic factor:
//! the smallest primitive root for odd prime-power components, `3` for the
//! component `4`, and the pair `(-1, 5)` for `2^e` with `e >= 3`; generators
//! are lifted to mod `f` by the Chinese remainder theorem.  A character is an
//! exponent tuple against these generators, and the full dual group is
//! enumerated in row-major order over the tuples (first generator most
//! significant), so "character `idx` mod `f`" is a stable, reproducible name;
//! index 0 is the trivial character.
//!
//! Values are exact roots of unity: [`DirichletCharacter::value_exponent`]
//! gives `chi(a) = zeta_ord^k` symbolically, [`evaluate_cyc`] materializes it
//! in `Q(zeta_ord)`, and [`evaluate_ring`] maps it through the deterministic
//! Teichmüller embedding of a p-adic ring built with the character's order.
//! Generalized Bernoulli numbers `B_{k,chi} = f^{k-1} sum_a chi(a) B_k(a/f)`
//! and Gauss sums `tau(chi) = sum_a chi(a) zeta_f^a` are computed exactly in
//! cyclotomic fields, giving the special values `L(1-k, chi) = -B_{k,chi}/k`
//! that the p-adic interpolation checks compare against.
//!
//! [`evaluate_cyc`]: DirichletCharacter::evaluate_cyc
//! [`evaluate_ring`]: DirichletCharacter::evaluate_ring

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cyclo_field::{bernoulli_numbers, bernoulli_poly_at, euler_phi, CycRational};
use crate::error::{Error, Result};
use crate::ring::{invm, powm, prime_factors, PadicElement, UnramifiedWitnessRing};

/// Parity of a character: the value at `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Generators and discrete-log tables for `(Z/f)^*`.
#[derive(Debug)]
struct UnitStructure {
    f: u64,
    /// CRT-lifted generators mod `f`, one per cyclic component.
    gens: Vec<u64>,
    /// Component orders (the group is the product of these cyclic factors).
    orders: Vec<u64>,
    /// `dlog[a] = Some(exponent tuple)` for units, `None` otherwise.
    dlog: Vec<Option<Vec<u64>>>,
}

/// Smallest generator of the cyclic group `(Z/q^e)^*`, `q` an odd prime.
fn smallest_primitive_root(qe: u64, q: u64) -> u64 {
    let phi = qe / q * (q - 1);
    let rs = prime_factors(phi);
    (2..qe)
        .find(|&g| g % q != 0 && rs.iter().all(|&r| powm(g, phi / r, qe) != 1))
        .expect("cyclic group has a generator")
}

fn crt_lift(residue: u64, modulus: u64, f: u64) -> u64 {
    // x = residue mod modulus, x = 1 mod (f / modulus)
    let other = f / modulus;
    if other == 1 {
        return residue % f;
    }
    let u = invm(other % modulus, modulus).expect("coprime CRT components");
    let v = invm(modulus % other, other).expect("coprime CRT components");
    let a = (residue as u128 * u as u128 % modulus as u128) * other as u128;
    let b = v as u128 * modulus as u128;
    ((a + b) % f as u128) as u64
}

fn unit_structure(f: u64) -> Arc<UnitStructure> {
    let mut gens = Vec::new();
    let mut orders = Vec::new();
    let mut rest = f;
    // component at 2
    let mut two_e = 1u64;
    while rest % 2 == 0 {
        rest /= 2;
        two_e *= 2;
    }
    match two_e {
        1 | 2 => {}
        4 => {
            gens.push(crt_lift(3, 4, f));
            orders.push(2);
        }
        _ => {
            gens.push(crt_lift(two_e - 1, two_e, f));
            orders.push(2);
            gens.push(crt_lift(5, two_e, f));
            orders.push(two_e / 4);
        }
    }
    // odd components
    let mut m = rest;
    let mut q = 3;
    while q * q <= m {
        if m % q == 0 {
            let mut qe = 1;
            while m % q == 0 {
                m /= q;
                qe *= q;
            }
            gens.push(crt_lift(smallest_primitive_root(qe, q), qe, f));
            orders.push(qe / q * (q - 1));
        }
        q += 2;
    }
    if m > 1 {
        gens.push(crt_lift(smallest_primitive_root(m, m), m, f));
        orders.push(m - 1);
    }

    // discrete logs by odometer walk: one multiplication per unit
    let mut dlog: Vec<Option<Vec<u64>>> = vec![None; f.max(1) as usize];
    let mut tuple = vec![0u64; gens.len()];
    let mut value = 1 % f.max(1);
    loop {
        dlog[value as usize] = Some(tuple.clone());
        // increment the mixed-radix odometer (last component fastest)
        let mut j = gens.len();
        loop {
            if j == 0 {
                // walked the whole group
                return Arc::new(UnitStructure {
                    f,
                    gens,
                    orders,
                    dlog,
                });
            }
            j -= 1;
            value = (value as u128 * gens[j] as u128 % f as u128) as u64;
            tuple[j] += 1;
            if tuple[j] < orders[j] {
                break;
            }
            // wrapping multiplies by gens[j] once more, closing the cycle
            tuple[j] = 0;
        }
    }
}

/// A Dirichlet character mod `f`, identified by its exponent tuple.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    structure: Arc<UnitStructure>,
    exps: Vec<u64>,
    index: u64,
    order: u64,
    conductor: u64,
    parity: Parity,
}

impl DirichletCharacter {
    fn from_exps(structure: Arc<UnitStructure>, exps: Vec<u64>) -> Self {
        let mut index = 0u64;
        let mut order = 1u64;
        for (j, (&e, &o)) in exps.iter().zip(structure.orders.iter()).enumerate() {
            index = index * structure.orders[j] + e;
            order = order.lcm(&(o / e.gcd(&o)));
        }
        let mut chi = DirichletCharacter {
            structure,
            exps,
            index,
            order,
            conductor: 1,
            parity: Parity::Even,
        };
        chi.conductor = chi.compute_conductor();
        chi.parity = if chi.structure.f > 2
            && chi.value_exponent(chi.structure.f - 1) != Some(0)
        {
            Parity::Odd
        } else {
            Parity::Even
        };
        chi
    }

    fn compute_conductor(&self) -> u64 {
        let f = self.structure.f;
        if f == 1 {
            return 1;
        }
        let mut divisors: Vec<u64> = (1..=f).filter(|d| f % d == 0).collect();
        divisors.sort_unstable();
        'outer: for &d in &divisors {
            // chi factors through (Z/d)^* iff it kills everything = 1 mod d
            for a in (1..f.max(2)).filter(|a| a % d == 1 % d.max(1)) {
                if self.structure.dlog[a as usize].is_some() && self.value_exponent(a) != Some(0) {
                    continue 'outer;
                }
            }
            return d;
        }
        f
    }

    pub fn modulus(&self) -> u64 {
        self.structure.f
    }
    pub fn conductor(&self) -> u64 {
        self.conductor
    }
    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn is_odd(&self) -> bool {
        self.parity == Parity::Odd
    }
    pub fn is_primitive(&self) -> bool {
        self.conductor == self.structure.f
    }
    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
    /// Position in the deterministic enumeration of characters mod `f`.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// The inverse (= conjugate) character.
    pub fn inverse(&self) -> DirichletCharacter {
        let exps = self
            .exps
            .iter()
            .zip(self.structure.orders.iter())
            .map(|(&e, &o)| (o - e) % o)
            .collect();
        Self::from_exps(self.structure.clone(), exps)
    }

    /// `chi(a) = zeta_order^k`: returns `k`, or `None` when `gcd(a, f) > 1`.
    pub fn value_exponent(&self, a: u64) -> Option<u64> {
        let f = self.structure.f;
        if f == 1 {
            return Some(0);
        }
        let tuple = self.structure.dlog[(a % f) as usize].as_ref()?;
        // exponent in the full lcm L of component orders, then rescale to ord
        let mut l = 1u64;
        for &o in &self.structure.orders {
            l = l.lcm(&o);
        }
        let mut e: u128 = 0;
        for ((&k, &t), &o) in self
            .exps
            .iter()
            .zip(tuple.iter())
            .zip(self.structure.orders.iter())
        {
            e += k as u128 * t as u128 * (l / o) as u128;
        }
        let e = (e % l as u128) as u64;
        // zeta_L^e lies in mu_ord, so L | e * ord
        debug_assert_eq!((e as u128 * self.order as u128) % l as u128, 0);
        let k = (e as u128 * self.order as u128 / l as u128) as u64;
        Some(k % self.order)
    }

    /// Exact value in `Q(zeta_order)` (zero when `gcd(a, f) > 1`).
    pub fn evaluate_cyc(&self, a: u64) -> CycRational {
        match self.value_exponent(a) {
            None => CycRational::zero(self.order),
            Some(k) => CycRational::zeta_pow(self.order, k),
        }
    }

    /// Value under the ring's deterministic root-of-unity embedding (the
    /// ring must certify the character's order).
    pub fn evaluate_ring(&self, a: u64, ring: &UnramifiedWitnessRing) -> Result<PadicElement> {
        match self.value_exponent(a) {
            None => Ok(ring.zero()),
            Some(k) => Ok(ring.zeta(self.order)?.pow_u64(k)),
        }
    }

    /// Generalized Bernoulli number `B_{k,chi}`, exactly.
    pub fn bernoulli_exact(&self, k: u64) -> CycRational {
        assert!(k >= 1);
        let f = self.structure.f;
        let bern = bernoulli_numbers(k as usize);
        let mut acc = CycRational::zero(self.order);
        for a in 1..=f {
            let chi_a = self.evaluate_cyc(a);
            if chi_a.is_zero() {
                continue;
            }
            let x = BigRational::new(BigInt::from(a), BigInt::from(f));
            acc = acc.add(&chi_a.mul_rational(&bernoulli_poly_at(k, &x, &bern)));
        }
        let scale = BigRational::from(BigInt::from(f)).pow(k as i32 - 1);
        acc.mul_rational(&scale)
    }

    /// The exact special value `L(1 - k, chi) = -B_{k,chi} / k`.
    pub fn l_value_exact(&self, k: u64) -> CycRational {
        self.bernoulli_exact(k)
            .mul_rational(&BigRational::new(BigInt::from(-1), BigInt::from(k)))
    }

    /// Gauss sum `tau(chi) = sum_a chi(a) zeta_f^a`, exactly, in the
    /// compositum `Q(zeta_lcm(order, f))`.
    pub fn gauss_sum_exact(&self) -> CycRational {
        let f = self.structure.f;
        let level = self.order.lcm(&f);
        let mut acc = CycRational::zero(level);
        for a in 1..=f {
            let chi_a = self.evaluate_cyc(a);
            if chi_a.is_zero() {
                continue;
            }
            let zf = CycRational::zeta_pow(level, (a * (level / f)) % level);
            acc = acc.add(&chi_a.mul(&zf));
        }
        acc
    }

    pub fn descriptor(&self) -> CharacterDescriptor {
        CharacterDescriptor {
            f: self.structure.f.to_string(),
            index: self.index.to_string(),
            generators: self.structure.gens.iter().map(|g| g.to_string()).collect(),
            component_orders: self.structure.orders.iter().map(|o| o.to_string()).collect(),
            exponents: self.exps.iter().map(|e| e.to_string()).collect(),
            order: self.order.to_string(),
            conductor: self.conductor.to_string(),
            parity: match self.parity {
                Parity::Even => "even".into(),
                Parity::Odd => "odd".into(),
            },
        }
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.structure.f == other.structure.f && self.exps == other.exps
    }
}
impl Eq for DirichletCharacter {}

/// All characters mod `f` in deterministic (index) order.
pub fn characters_mod(f: u64) -> Vec<DirichletCharacter> {
    assert!(f >= 1);
    let structure = unit_structure(f);
    let count: u64 = structure.orders.iter().product();
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let mut exps = vec![0u64; structure.orders.len()];
        let mut t = idx;
        for j in (0..structure.orders.len()).rev() {
            exps[j] = t % structure.orders[j];
            t /= structure.orders[j];
        }
        out.push(DirichletCharacter::from_exps(structure.clone(), exps));
    }
    out
}

/// The character mod `f` with the given enumeration index.
pub fn character(f: u64, idx: u64) -> Result<DirichletCharacter> {
    let phi = euler_phi(f);
    if idx >= phi {
        return Err(Error::CharacterIndex { f, idx, phi });
    }
    Ok(characters_mod(f).swap_remove(idx as usize))
}

/// Rebuild a character from its serialized descriptor, verifying the stored
/// presentation against the deterministic one.
pub fn character_from_descriptor(desc: &CharacterDescriptor) -> Result<DirichletCharacter> {
    let f: u64 = desc.f.parse().map_err(|_| Error::Internal("bad f".into()))?;
    let idx: u64 = desc
        .index
        .parse()
        .map_err(|_| Error::Internal("bad character index".into()))?;
    let chi = character(f, idx)?;
    if chi.descriptor() != *desc {
        return Err(Error::Internal(
            "character descriptor does not match its deterministic rebuild".into(),
        ));
    }
    Ok(chi)
}

/// JSON-facing description of a character (all integers decimal strings).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CharacterDescriptor {
    pub f: String,
    pub index: String,
    pub generators: Vec<String>,
    pub component_orders: Vec<String>,
    pub exponents: Vec<String>,
    pub order: String,
    pub conductor: String,
    pub parity: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_group_presentations() {
        let s8 = unit_structure(8);
        assert_eq!(s8.gens, vec![7, 5]);
        assert_eq!(s8.orders, vec![2, 2]);
        let s5 = unit_structure(5);
        assert_eq!(s5.gens, vec![2]);
        assert_eq!(s5.orders, vec![4]);
        let s12 = unit_structure(12);
        assert_eq!(s12.gens, vec![7, 5]);
        assert_eq!(s12.orders, vec![2, 2]);
        let s9 = unit_structure(9);
        assert_eq!(s9.gens, vec![2]);
        assert_eq!(s9.orders, vec![6]);
    }

    #[test]
    fn dlog_tables_cover_units() {
        for f in [1u64, 2, 3, 4, 5, 8, 9, 12, 16, 21, 40] {
            let s = unit_structure(f);
            let units = (0..f.max(1))
                .filter(|&a| s.dlog[a as usize].is_some())
                .count() as u64;
            assert_eq!(units, euler_phi(f).max(1), "f = {f}");
        }
    }

    #[test]
    fn enumeration_counts_and_indices() {
        for f in [1u64, 3, 4, 5, 8, 12, 15] {
            let chars = characters_mod(f);
            assert_eq!(chars.len() as u64, euler_phi(f));
            for (i, chi) in chars.iter().enumerate() {
                assert_eq!(chi.index(), i as u64);
            }
            assert!(chars[0].is_trivial());
        }
        assert!(matches!(
            character(8, 4),
            Err(Error::CharacterIndex { .. })
        ));
    }

    #[test]
    fn orthogonality() {
        for f in [5u64, 8, 12] {
            for chi in characters_mod(f) {
                let mut acc = CycRational::zero(chi.order());
                for a in 1..=f {
                    acc = acc.add(&chi.evaluate_cyc(a));
                }
                if chi.is_trivial() {
                    assert!(!acc.is_zero());
                } else {
                    assert!(acc.is_zero(), "f = {f}, index = {}", chi.index());
                }
            }
        }
    }

    #[test]
    fn multiplicativity() {
        let chi = character(8, 1).unwrap();
        for a in 1..8u64 {
            for b in 1..8 {
                let lhs = chi.evaluate_cyc(a * b);
                let rhs = chi.evaluate_cyc(a).mul(&chi.evaluate_cyc(b));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn quartic_field_character() {
        // mod 4, index 1: the odd primitive quadratic character
        let chi = character(4, 1).unwrap();
        assert_eq!(chi.order(), 2);
        assert_eq!(chi.conductor(), 4);
        assert!(chi.is_odd());
        assert_eq!(chi.value_exponent(3), Some(1)); // chi(3) = -1
        assert_eq!(
            chi.bernoulli_exact(1).as_rational().unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(2))
        );
        // tau^2 = -4
        let tau = chi.gauss_sum_exact();
        assert_eq!(tau.mul(&tau), CycRational::from_integer(4, -4));
    }

    #[test]
    fn cubic_field_character() {
        let chi = character(3, 1).unwrap();
        assert!(chi.is_odd());
        assert_eq!(
            chi.bernoulli_exact(1).as_rational().unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(3))
        );
        // L(0, chi) = -B_1 = 1/3
        assert_eq!(
            chi.l_value_exact(1).as_rational().unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(3))
        );
    }

    #[test]
    fn octic_conductor_characters() {
        let chars = characters_mod(8);
        // index 1: chi(7) = 1, chi(5) = -1: the even primitive character
        let chi8 = &chars[1];
        assert_eq!(chi8.value_exponent(7), Some(0));
        assert_eq!(chi8.value_exponent(5), Some(1));
        assert!(!chi8.is_odd());
        assert!(chi8.is_primitive());
        // index 2: chi(7) = -1, chi(5) = 1: induced from the mod-4 character
        let ind4 = &chars[2];
        assert_eq!(ind4.conductor(), 4);
        assert!(!ind4.is_primitive());
        // index 3: odd and primitive
        let chi8m = &chars[3];
        assert!(chi8m.is_odd());
        assert!(chi8m.is_primitive());

        // frozen exact values for the even character
        assert!(chi8.bernoulli_exact(1).is_zero());
        assert_eq!(
            chi8.bernoulli_exact(2).as_rational().unwrap(),
            BigRational::from(BigInt::from(2))
        );
        // tau(chi_8)^2 = chi(-1) * 8 = 8
        let tau = chi8.gauss_sum_exact();
        assert_eq!(tau.mul(&tau), CycRational::from_integer(8, 8));
    }

    #[test]
    fn gauss_sum_norm_identity() {
        // tau(chi) tau(chi bar) = chi(-1) f for primitive chi
        for (f, idx) in [(5u64, 1u64), (5, 2), (8, 1), (8, 3), (7, 1), (12, 3)] {
            let chi = character(f, idx).unwrap();
            if !chi.is_primitive() {
                continue;
            }
            let lhs = chi.gauss_sum_exact().mul(&chi.inverse().gauss_sum_exact());
            let sign = if chi.is_odd() { -1 } else { 1 };
            assert_eq!(
                lhs,
                CycRational::from_integer(1, sign * f as i64),
                "f = {f}, idx = {idx}"
            );
        }
    }

    #[test]
    fn bernoulli_parity_vanishing() {
        for (f, idx) in [(5u64, 1u64), (5, 2), (5, 3), (8, 1), (8, 2), (8, 3), (7, 2)] {
            let chi = character(f, idx).unwrap();
            if chi.is_trivial() {
                continue;
            }
            for k in 1..=4u64 {
                let matches_parity =
                    (k % 2 == 1) == chi.is_odd();
                if !matches_parity && !(k == 1 && chi.is_trivial()) {
                    assert!(
                        chi.bernoulli_exact(k).is_zero(),
                        "B_{k} should vanish for f = {f}, idx = {idx}"
                    );
                }
            }
        }
    }

    #[test]
    fn trivial_character_gives_zeta_values() {
        let chi = character(1, 0).unwrap();
        // L(0) = -1/2, L(-1) = -1/12
        assert_eq!(
            chi.l_value_exact(1).as_rational().unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(2))
        );
        assert_eq!(
            chi.l_value_exact(2).as_rational().unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(12))
        );
    }

    #[test]
    fn ring_embedding_is_multiplicative() {
        let ring = UnramifiedWitnessRing::build(7, 4, &[8]).unwrap();
        let chi = character(8, 1).unwrap();
        for a in [1u64, 3, 5, 7] {
            for b in [1u64, 3, 5, 7] {
                let lhs = chi.evaluate_ring(a * b, &ring).unwrap();
                let rhs = chi
                    .evaluate_ring(a, &ring)
                    .unwrap()
                    .mul(&chi.evaluate_ring(b, &ring).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
        // zero off the units
        assert!(chi.evaluate_ring(6, &ring).unwrap().is_zero());
        // values are the expected square roots of unity
        assert_eq!(chi.evaluate_ring(7, &ring).unwrap(), ring.one());
        assert_eq!(chi.evaluate_ring(5, &ring).unwrap(), ring.one().neg());
    }

    #[test]
    fn inverse_character() {
        let chi = character(5, 1).unwrap(); // order 4
        let inv = chi.inverse();
        for a in 1..5u64 {
            assert_eq!(
                chi.evaluate_cyc(a).mul(&inv.evaluate_cyc(a)),
                CycRational::one(chi.order())
            );
        }
        assert_eq!(chi.inverse().inverse(), chi);
    }

    #[test]
    fn descriptor_roundtrip() {
        let chi = character(8, 3).unwrap();
        let d = chi.descriptor();
        let json = serde_json::to_string(&d).unwrap();
        let back: CharacterDescriptor = serde_json::from_str(&json).unwrap();
        let chi2 = character_from_descriptor(&back).unwrap();
        assert_eq!(chi, chi2);
        assert_eq!(back.parity, "odd");
    }

    #[test]
    fn bernoulli_scaling_sanity() {
        // B_{2,triv mod 1} = B_2 = 1/6
        let chi = character(1, 0).unwrap();
        assert_eq!(
            chi.bernoulli_exact(2).as_rational().unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(6))
        );
    }
}
