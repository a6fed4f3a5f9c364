//! Verification reports: deterministic, serializable summaries of one
//! identity suite run on one instance.
//!
//! Every numerical quantity is rendered as decimal digit strings together
//! with its guaranteed precision exponent, so reports are exact records of
//! what was computed; rendering never rounds.  Field order is fixed by the
//! struct definitions and all collections are built in deterministic order,
//! making serialized reports byte-identical across runs and worker counts.

use serde::{Deserialize, Serialize};

use crate::ring::{PadicElement, PadicScaled};

/// A named value carried by a report: `value` holds the coefficient digits
/// (comma-separated, constant coefficient first, `/p^k` suffix for scaled
/// values) and `prec` the number of guaranteed digits.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Quantity {
    pub name: String,
    pub value: String,
    pub prec: String,
}

impl Quantity {
    pub fn from_elem(name: &str, e: &PadicElement) -> Self {
        Quantity {
            name: name.into(),
            value: digits(e),
            prec: e.precision().to_string(),
        }
    }

    pub fn from_scaled(name: &str, s: &PadicScaled) -> Self {
        let value = if s.shift() == 0 {
            digits(s.num())
        } else {
            format!("{}/p^{}", digits(s.num()), s.shift())
        };
        Quantity {
            name: name.into(),
            value,
            prec: s.abs_prec().to_string(),
        }
    }

    pub fn from_text(name: &str, value: &str) -> Self {
        Quantity {
            name: name.into(),
            value: value.into(),
            prec: "exact".into(),
        }
    }
}

fn digits(e: &PadicElement) -> String {
    e.coeffs()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One checked identity: its label, whether it held to the required number
/// of digits, and how many digits actually agreed.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Verdict {
    pub identity: String,
    pub pass: bool,
    pub agreement_exponent: u32,
}

/// The instance a report describes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceLabel {
    pub p: u64,
    pub f: u64,
    pub index: u64,
    pub parity: String,
    pub n: u32,
    pub m: usize,
    pub level: u32,
}

/// The result of one suite on one instance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Report {
    pub instance: InstanceLabel,
    pub suite: String,
    pub quantities: Vec<Quantity>,
    pub verdicts: Vec<Verdict>,
    /// Checks that could not be decided at the available precision, with
    /// reasons; a non-empty list means the suite was inconclusive, not
    /// failed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skips: Vec<String>,
}

impl Report {
    /// All verdicts passed (an empty verdict list does not count as a pass
    /// unless the suite recorded skips instead).
    pub fn passed(&self) -> bool {
        (!self.verdicts.is_empty() || !self.skips.is_empty())
            && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn skipped(&self) -> bool {
        !self.skips.is_empty()
    }

    /// Canonical serialized form (pretty JSON with a trailing newline).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let i = &self.instance;
        out.push_str(&format!(
            "instance p={} f={} chi#{} ({}) N={} M={} level={}  suite={}\n",
            i.p, i.f, i.index, i.parity, i.n, i.m, i.level, self.suite
        ));
        let wname = self
            .quantities
            .iter()
            .map(|q| q.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        for q in &self.quantities {
            out.push_str(&format!(
                "  {:wname$}  prec {:>5}  {}\n",
                q.name,
                q.prec,
                q.value,
                wname = wname
            ));
        }
        for v in &self.verdicts {
            out.push_str(&format!(
                "  [{}] {} (agreement {})\n",
                if v.pass { "PASS" } else { "FAIL" },
                v.identity,
                v.agreement_exponent
            ));
        }
        for s in &self.skips {
            out.push_str(&format!("  [SKIP] {s}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::UnramifiedWitnessRing;

    #[test]
    fn report_serialization_is_stable_and_roundtrips() {
        let r = UnramifiedWitnessRing::build(7, 4, &[8]).unwrap();
        let e = r.from_u64(123).add(&r.x_element());
        let report = Report {
            instance: InstanceLabel {
                p: 7,
                f: 8,
                index: 1,
                parity: "even".into(),
                n: 4,
                m: 16,
                level: 6,
            },
            suite: "kronecker".into(),
            quantities: vec![
                Quantity::from_elem("lp_at_1", &e),
                Quantity::from_scaled("alpha", &PadicScaled::new(e.clone(), 1)),
            ],
            verdicts: vec![Verdict {
                identity: "limit formula".into(),
                pass: true,
                agreement_exponent: 3,
            }],
            skips: vec![],
        };
        let j1 = report.to_json();
        let j2 = report.to_json();
        assert_eq!(j1, j2);
        assert!(j1.ends_with('\n'));
        assert!(!j1.contains("skips"), "empty skip list is omitted");
        let back: Report = serde_json::from_str(&j1).unwrap();
        assert_eq!(back, report);
        assert!(back.passed());
        assert_eq!(back.quantities[0].value, "123,1");
        assert!(back.quantities[1].value.ends_with("/p^1"));
        let table = report.render_table();
        assert!(table.contains("[PASS] limit formula (agreement 3)"));
    }

    #[test]
    fn pass_and_skip_semantics() {
        let empty = Report {
            instance: InstanceLabel {
                p: 5,
                f: 4,
                index: 1,
                parity: "odd".into(),
                n: 12,
                m: 16,
                level: 8,
            },
            suite: "ferrero-greenberg".into(),
            quantities: vec![],
            verdicts: vec![],
            skips: vec![],
        };
        assert!(!empty.passed(), "no evidence is not a pass");
        let skipped = Report {
            skips: vec!["precision exhausted".into()],
            ..empty.clone()
        };
        assert!(skipped.passed() && skipped.skipped());
        let failed = Report {
            verdicts: vec![Verdict {
                identity: "x".into(),
                pass: false,
                agreement_exponent: 0,
            }],
            ..empty
        };
        assert!(!failed.passed());
    }
}
