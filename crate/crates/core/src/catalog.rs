//! Instance catalog: the `(p, chi)` pairs the verification suites run on.
//!
//! An instance is an odd prime `p` together with a primitive nontrivial
//! Dirichlet character `chi` of conductor prime to `p`, of prime-to-`p`
//! order, with `chi(p) = 1` — the split hypothesis under which the branch
//! series has its exceptional behaviour (`chi(p) = 1` makes the Euler-like
//! factor `1 - chi(p)` vanish on the even side and produces the trivial
//! zero on the odd side).  Enumeration order is `(p, f, character index)`
//! and is deterministic.

use num_integer::lcm;

use crate::dirichlet::{characters_mod, DirichletCharacter, Parity};
use crate::error::{Error, Result};
use crate::ring::UnramifiedWitnessRing;

/// Default working precision (digits of `p`).
pub const DEFAULT_PRECISION: u32 = 12;
/// Default series truncation length.
pub const DEFAULT_TRUNCATION: usize = 16;

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One verification instance: the pair, plus the construction parameters
/// every suite will use (precision `n`, truncation `m_len`, tower level).
#[derive(Clone, Debug)]
pub struct InstanceSpec {
    p: u64,
    chi: DirichletCharacter,
    n: u32,
    m_len: usize,
    level: u32,
}

impl InstanceSpec {
    /// Validate the split hypothesis and attach default parameters: the
    /// default tower level is chosen so the unit-group sweep of the series
    /// construction stays near 2*10^7 elements.
    pub fn new(p: u64, chi: DirichletCharacter) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Internal(format!("{p} is not an odd prime")));
        }
        if chi.is_trivial() {
            return Err(Error::TrivialCharacter);
        }
        if !chi.is_primitive() {
            return Err(Error::NotPrimitive {
                f: chi.modulus(),
                cond: chi.conductor(),
            });
        }
        if gcd(chi.conductor(), p) != 1 {
            return Err(Error::ConductorNotCoprime {
                f: chi.conductor(),
                p,
            });
        }
        if gcd(chi.order(), p) != 1 {
            return Err(Error::OrderNotPrimeToP {
                order: chi.order(),
                p,
            });
        }
        if chi.value_exponent(p) != Some(0) {
            return Err(Error::NotSplit);
        }
        let level = default_level(p, chi.conductor());
        Ok(InstanceSpec {
            p,
            chi,
            n: DEFAULT_PRECISION,
            m_len: DEFAULT_TRUNCATION,
            level,
        })
    }

    pub fn with_precision(mut self, n: u32) -> Self {
        self.n = n.max(1);
        self
    }
    pub fn with_truncation(mut self, m_len: usize) -> Self {
        self.m_len = m_len.max(2);
        self
    }
    pub fn with_level(mut self, level: u32) -> Self {
        self.level = level.max(1);
        self
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn chi(&self) -> &DirichletCharacter {
        &self.chi
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn m_len(&self) -> usize {
        self.m_len
    }
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Effective digit count of branch-series evaluations at this level:
    /// `min(N, level + 1, M)`.
    pub fn n_eff(&self) -> u32 {
        self.n.min(self.level + 1).min(self.m_len as u32)
    }

    /// Root orders the working ring must contain: one order covering both
    /// the character values and the conductor-level roots of unity (Gauss
    /// sums live at level `lcm(order, f)`).
    pub fn ring_orders(&self) -> Vec<u64> {
        vec![lcm(self.chi.order(), self.chi.conductor())]
    }

    /// Build the working ring for this instance.
    pub fn build_ring(&self) -> Result<UnramifiedWitnessRing> {
        UnramifiedWitnessRing::build(self.p, self.n, &self.ring_orders())
    }

    /// Stable short label, usable as a file stem.
    pub fn label(&self) -> String {
        format!("p{}-f{}-chi{}", self.p, self.chi.conductor(), self.chi.index())
    }

    /// The fundamental discriminant attached to an odd quadratic character
    /// (conductor = |disc|), if this instance has one.
    pub fn discriminant(&self) -> Option<i64> {
        if self.chi.is_odd() && self.chi.order() == 2 {
            Some(-(self.chi.conductor() as i64))
        } else {
            None
        }
    }
}

/// Largest tower level keeping `f * p^(level+1)` at or below 2*10^7 (the
/// branch construction sweeps that many residues), but at least 2.
fn default_level(p: u64, f: u64) -> u32 {
    const BUDGET: u64 = 20_000_000;
    let mut level = 2u32;
    let mut cost = f.saturating_mul(p.pow(3));
    while cost.saturating_mul(p) <= BUDGET {
        level += 1;
        cost = cost.saturating_mul(p);
    }
    level
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// All instances with `f <= f_max`, `p <= p_max`, and the requested parity
/// (`None` keeps both), in `(p, f, index)` order.
pub fn catalog_search(f_max: u64, p_max: u64, parity: Option<Parity>) -> Vec<InstanceSpec> {
    let mut out = Vec::new();
    for p in 3..=p_max {
        if !is_prime(p) {
            continue;
        }
        for f in 3..=f_max {
            for chi in characters_mod(f) {
                if let Some(want) = parity {
                    if chi.parity() != want {
                        continue;
                    }
                }
                if let Ok(spec) = InstanceSpec::new(p, chi) {
                    out.push(spec);
                }
            }
        }
    }
    out
}
