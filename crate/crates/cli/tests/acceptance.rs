//! End-to-end acceptance gate.  Each criterion prints one PASS/FAIL
//! line (run with `--nocapture` to watch), and the test fails if any
//! criterion does.  Thresholds and runtime budgets are pinned here, not
//! read from configuration, so a regression cannot silently relax them.

use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use padicl_core::catalog::{catalog_search, InstanceSpec};
use padicl_core::coleman::{measure_from_tower, phi_operator, psi_operator, tower_series, AmiceMeasure, gauss_normalization};
use padicl_core::dirichlet::{character, Parity};
use padicl_core::iwasawa::build_series;
use padicl_core::report::Report;
use padicl_core::series::TruncatedSeries;
use padicl_core::verify::{run_suite, Suite};
use padicl_core::UnramifiedWitnessRing;
use rayon::prelude::*;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, result: Result<String>) -> Outcome {
    match result {
        Ok(detail) => Outcome {
            name,
            pass: true,
            detail,
        },
        Err(err) => Outcome {
            name,
            pass: false,
            detail: format!("{err:#}"),
        },
    }
}

#[test]
fn acceptance_criteria() {
    let outcomes = vec![
        outcome("criterion 1: interpolation k=1..5", criterion_1()),
        outcome("criterion 2: Kronecker limit at s=1", criterion_2()),
        outcome("criterion 3: Ferrero-Greenberg derivative", criterion_3()),
        outcome("criterion 4: height triangle S*alpha = L_p(1)", criterion_4()),
        outcome("criterion 5: Coleman vs Stickelberger", criterion_5()),
        outcome("criterion 6: exceptional zeros across the catalog", criterion_6()),
        outcome("criterion 7: property suites", criterion_7()),
    ];
    let mut all = true;
    for o in &outcomes {
        println!("[{}] {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        all &= o.pass;
    }
    assert!(all, "at least one acceptance criterion failed (see lines above)");
}

fn instance(p: u64, f: u64, idx: u64) -> Result<InstanceSpec> {
    Ok(InstanceSpec::new(p, character(f, idx)?)?)
}

/// The two pinned even/mixed reference instances: p=7 with the even
/// quadratic character of conductor 8, and p=11 with the even quadratic
/// character of conductor 5.
fn reference_instances() -> Result<[InstanceSpec; 2]> {
    Ok([instance(7, 8, 1)?, instance(11, 5, 2)?])
}

fn single_report(spec: &InstanceSpec, suite: Suite) -> Result<Report> {
    let mut reports = run_suite(spec, suite)?;
    if reports.len() != 1 {
        bail!("expected one report, got {}", reports.len());
    }
    Ok(reports.remove(0))
}

fn require_all_pass(report: &Report, floor: u32) -> Result<()> {
    if !report.skips.is_empty() {
        bail!("unexpected skips: {:?}", report.skips);
    }
    if report.verdicts.is_empty() {
        bail!("report carries no verdicts");
    }
    for v in &report.verdicts {
        if !v.pass {
            bail!("verdict failed: {}", v.identity);
        }
        if v.agreement_exponent < floor {
            bail!(
                "verdict {:?} agreement {} below the pinned floor {}",
                v.identity,
                v.agreement_exponent,
                floor
            );
        }
    }
    Ok(())
}

/// Interpolation at k = 1..5 with agreement >= N_eff - 1 at N=12, M=16;
/// under ten seconds per instance.
fn criterion_1() -> Result<String> {
    let mut details = Vec::new();
    for spec in reference_instances()? {
        let start = Instant::now();
        let report = single_report(&spec, Suite::Interpolation)?;
        let elapsed = start.elapsed();
        if report.verdicts.len() != 5 {
            bail!("{}: expected five interpolation verdicts", spec.label());
        }
        require_all_pass(&report, spec.n_eff().saturating_sub(1))
            .with_context(|| spec.label())?;
        if elapsed >= Duration::from_secs(10) {
            bail!("{}: {elapsed:.2?} exceeds the 10 s budget", spec.label());
        }
        details.push(format!("{} in {elapsed:.2?}", spec.label()));
    }
    Ok(details.join(", "))
}

/// lp_eval at s=1 equals the limit-formula value with agreement
/// >= N_eff - 2 on both reference instances; under thirty seconds.
fn criterion_2() -> Result<String> {
    let start = Instant::now();
    let mut details = Vec::new();
    for spec in reference_instances()? {
        let report = single_report(&spec, Suite::Kronecker)?;
        require_all_pass(&report, spec.n_eff().saturating_sub(2))
            .with_context(|| spec.label())?;
        details.push(spec.label());
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        bail!("{elapsed:.2?} exceeds the 30 s budget");
    }
    Ok(format!("{} in {elapsed:.2?}", details.join(", ")))
}

/// The derivative identity at s=0 on three odd quadratic instances with
/// agreement >= N_eff - 3; the (5, -4) instance reproduces the mod-25
/// anchors; under sixty seconds total.
fn criterion_3() -> Result<String> {
    let start = Instant::now();
    let specs = [instance(5, 4, 1)?, instance(7, 3, 1)?, instance(13, 4, 1)?];
    for spec in &specs {
        let report = single_report(spec, Suite::FerreroGreenberg)?;
        require_all_pass(&report, 0).with_context(|| spec.label())?;
        let derivative = report
            .verdicts
            .iter()
            .find(|v| v.identity.starts_with("derivative at s = 0"))
            .ok_or_else(|| anyhow!("{}: derivative verdict missing", spec.label()))?;
        if derivative.agreement_exponent < spec.n_eff().saturating_sub(3) {
            bail!(
                "{}: derivative agreement {} below N_eff - 3 = {}",
                spec.label(),
                derivative.agreement_exponent,
                spec.n_eff().saturating_sub(3)
            );
        }
        let anchors = report
            .verdicts
            .iter()
            .filter(|v| v.identity.starts_with("anchor:"))
            .count();
        if spec.label() == "p5-f4-chi1" && anchors != 2 {
            bail!("p5-f4-chi1: expected the two mod-25 anchor verdicts, saw {anchors}");
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(60) {
        bail!("{elapsed:.2?} exceeds the 60 s budget");
    }
    Ok(format!("3 instances with mod-25 anchors in {elapsed:.2?}"))
}

/// The exceptional-zero triangle: Solomon valuation times alpha at v_0
/// equals L_p(1, chi), three independently computed quantities, with
/// agreement >= N_eff - 3 on both reference instances.
fn criterion_4() -> Result<String> {
    let start = Instant::now();
    for spec in reference_instances()? {
        let report = single_report(&spec, Suite::HeightEven)?;
        require_all_pass(&report, spec.n_eff().saturating_sub(3))
            .with_context(|| spec.label())?;
        for name in ["solomon_valuation", "alpha_v0", "lp_at_1"] {
            if !report.quantities.iter().any(|q| q.name == name) {
                bail!("{}: quantity {name} missing from the report", spec.label());
            }
        }
    }
    Ok(format!("both instances in {:.2?}", start.elapsed()))
}

/// The Gamma-transform of the cyclotomic-unit tower agrees with the
/// branch series coefficientwise mod (p^(N_eff-3), T^8) on (7, chi_8);
/// under two minutes.
fn criterion_5() -> Result<String> {
    let start = Instant::now();
    let spec = instance(7, 8, 1)?;
    let report = single_report(&spec, Suite::Coleman)?;
    require_all_pass(&report, 0).with_context(|| spec.label())?;
    let coeffwise = report
        .verdicts
        .iter()
        .find(|v| v.identity.starts_with("coefficientwise agreement"))
        .ok_or_else(|| anyhow!("coefficientwise verdict missing"))?;
    let floor = spec.n_eff().saturating_sub(3);
    if coeffwise.agreement_exponent < floor {
        bail!(
            "coefficientwise agreement {} below N_eff - 3 = {floor}",
            coeffwise.agreement_exponent
        );
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(120) {
        bail!("{elapsed:.2?} exceeds the 120 s budget");
    }
    Ok(format!("window T^8 at agreement {} in {elapsed:.2?}", coeffwise.agreement_exponent))
}

/// Every odd character in the catalog has a branch vanishing identically
/// at s = 0 at full working precision.
fn criterion_6() -> Result<String> {
    let start = Instant::now();
    let specs = catalog_search(8, 13, Some(Parity::Odd));
    if specs.is_empty() {
        bail!("odd catalog is empty");
    }
    let failures: Vec<String> = specs
        .par_iter()
        .filter_map(|spec| {
            let check = || -> Result<()> {
                let ring = spec.build_ring()?;
                let branch = build_series(&ring, spec.chi(), 1, spec.level(), spec.m_len())?;
                let value = branch.lp_eval(0)?;
                if !value.is_zero() {
                    bail!("lp(0) = {value} is not identically zero");
                }
                Ok(())
            };
            check().err().map(|e| format!("{}: {e:#}", spec.label()))
        })
        .collect();
    if !failures.is_empty() {
        bail!(failures.join("; "));
    }
    Ok(format!("{} odd branches in {:.2?}", specs.len(), start.elapsed()))
}

/// Always-on property spot checks, plus report determinism across
/// worker counts driven through the installed binary.
fn criterion_7() -> Result<String> {
    log_properties()?;
    teichmuller_fixed_point()?;
    psi_inverts_phi()?;
    measure_moments()?;
    gauss_sum_norm()?;
    precision_soundness()?;
    worker_determinism()?;
    Ok("log, Teichmuller, psi/phi, moments, Gauss norm, N vs N+2, worker determinism".into())
}

fn log_properties() -> Result<()> {
    let ring = UnramifiedWitnessRing::build(7, 12, &[8])?;
    let a = ring.from_u64(23).add(&ring.x_element());
    let b = ring.from_u64(41).sub(&ring.x_element());
    let u = ring.one().add(&ring.from_u64(7).mul(&a));
    let v = ring.one().add(&ring.from_u64(7).mul(&b));
    let sum = u.iwasawa_log()?.add(&v.iwasawa_log()?);
    let joint = u.mul(&v).iwasawa_log()?;
    let e = sum.precision().min(joint.precision());
    if e == 0 || !sum.eq_mod(&joint, e) {
        bail!("log additivity fails: log(uv) != log u + log v at {e} digits");
    }
    let torsion = ring.from_u64(3).teichmuller()?.iwasawa_log()?;
    if !torsion.is_zero() {
        bail!("log does not kill torsion: {torsion}");
    }
    Ok(())
}

fn teichmuller_fixed_point() -> Result<()> {
    let ring = UnramifiedWitnessRing::build(7, 12, &[8])?;
    // Scalars are fixed by x -> x^p; a generic element only by x -> x^q.
    let scalar = ring.from_u64(5).teichmuller()?;
    if scalar.pow_u64(7) != scalar {
        bail!("scalar Teichmuller lift is not fixed by x -> x^p");
    }
    let t = ring.from_u64(5).add(&ring.x_element()).teichmuller()?;
    let q = 7u64.pow(ring.degree() as u32);
    if t.pow_u64(q) != t {
        bail!("Teichmuller lift is not fixed by x -> x^q");
    }
    if t.frobenius() != t.pow_u64(7) {
        bail!("Teichmuller lift does not intertwine Frobenius with x -> x^p");
    }
    Ok(())
}

fn psi_inverts_phi() -> Result<()> {
    let ring = UnramifiedWitnessRing::build(7, 10, &[8])?;
    let h = TruncatedSeries::from_u64_coeffs(&ring, &[3, 1, 4, 1]);
    let lifted = phi_operator(&h, 7 * h.len() + 1);
    let back = psi_operator(&lifted)?;
    for m in 0..h.len() {
        if back.coeff(m) != h.coeff(m) {
            bail!("psi(phi(h)) differs from h at T^{m}");
        }
    }
    Ok(())
}

fn measure_moments() -> Result<()> {
    let ring = UnramifiedWitnessRing::build(7, 10, &[8])?;
    let mu = AmiceMeasure::dirac(&ring, 3, 24);
    for k in 0..4usize {
        let expected = ring.from_u64(3u64.pow(k as u32));
        if mu.moment(k)? != expected {
            bail!("dirac moment {k} is not 3^{k}");
        }
    }
    Ok(())
}

fn gauss_sum_norm() -> Result<()> {
    let ring = UnramifiedWitnessRing::build(7, 12, &[8])?;
    let chi = character(8, 1)?;
    // For a real even character tau(chi)^2 = chi(-1) f = f.
    let kappa = gauss_normalization(&chi, &ring)?;
    if kappa.mul(&kappa) != ring.from_u64(8) {
        bail!("tau(chi)^2 != chi(-1) f for the conductor-8 character");
    }
    Ok(())
}

fn precision_soundness() -> Result<()> {
    let chi = character(8, 1)?;
    let narrow = UnramifiedWitnessRing::build(7, 12, &[8])?;
    let wide = UnramifiedWitnessRing::build(7, 14, &[8])?;
    let at_12 = build_series(&narrow, &chi, 0, 3, 8)?.lp_eval(1)?;
    let at_14 = build_series(&wide, &chi, 0, 3, 8)?.lp_eval(1)?;
    let e = at_12.precision().min(at_14.precision());
    if e == 0 {
        bail!("no comparable digits between N=12 and N=14");
    }
    let modulus = 7u64.pow(e);
    for (x, y) in at_12.coeffs().iter().zip(at_14.coeffs()) {
        if x % modulus != y % modulus {
            bail!("N=12 and N=14 runs disagree mod 7^{e}");
        }
    }
    Ok(())
}

/// The same sweep through the binary with one and eight workers, cold
/// and warm cache, must produce byte-identical stdout.
fn worker_determinism() -> Result<()> {
    let cache = tempfile::tempdir()?;
    let run = |workers: &str| -> Result<(std::process::ExitStatus, Vec<u8>)> {
        let out = Command::new(env!("CARGO_BIN_EXE_padicl"))
            .args([
                "verify", "all", "--all", "--f-max", "5", "--p-max", "7", "--n", "8",
                "--level", "3", "--m", "8", "--json", "--workers", workers,
            ])
            .env("PADIC_CACHE_DIR", cache.path())
            .output()
            .context("running the padicl binary")?;
        Ok((out.status, out.stdout))
    };
    let (status_one, bytes_one) = run("1")?;
    let (status_eight, bytes_eight) = run("8")?;
    let (status_warm, bytes_warm) = run("8")?;
    if !status_one.success() || status_one.code() != status_eight.code() || status_eight.code() != status_warm.code() {
        bail!(
            "exit codes differ or are nonzero: {:?} / {:?} / {:?}",
            status_one.code(),
            status_eight.code(),
            status_warm.code()
        );
    }
    if bytes_one.is_empty() {
        bail!("sweep produced no output");
    }
    if bytes_one != bytes_eight || bytes_eight != bytes_warm {
        bail!("reports are not byte-identical across worker counts and cache states");
    }
    Ok(())
}
