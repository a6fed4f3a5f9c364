//! Command-line driver: inspect witness rings and Dirichlet characters,
//! build and evaluate branch series (with an optional on-disk cache),
//! sweep the instance catalog, and run the verification suites with
//! reproducible reports.
//!
//! Exit codes: `0` when every verdict passed, `1` when at least one
//! identity check failed, `2` on usage or construction errors, `3` when
//! nothing failed but at least one check was undecidable at the
//! requested precision and was skipped.
//!
//! Set `PADIC_CACHE_DIR` to reuse branch series across runs; the cache
//! never changes computed values, only construction time.

mod cache;

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use padicl_core::catalog::{catalog_search, InstanceSpec, DEFAULT_PRECISION, DEFAULT_TRUNCATION};
use padicl_core::dirichlet::{character, characters_mod, DirichletCharacter, Parity};
use padicl_core::iwasawa::{build_series, BranchSeries, BranchSeriesDescriptor};
use padicl_core::quadratic::quadratic_character;
use padicl_core::report::{Quantity, Report};
use padicl_core::verify::{
    applicable_suites, is_precision_shortfall, run_suite_with, skip_report, BranchProvider, Suite,
};
use padicl_core::UnramifiedWitnessRing;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "padicl",
    version,
    about = "p-adic L-functions, cyclotomic-unit logarithms, and exceptional-zero checks \
             in exact mod-p^N arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Witness-ring utilities.
    Ring {
        #[command(subcommand)]
        action: RingCmd,
    },
    /// Dirichlet-character utilities.
    Chars {
        #[command(subcommand)]
        action: CharsCmd,
    },
    /// Branch-series construction and evaluation.
    Lp {
        #[command(subcommand)]
        action: LpCmd,
    },
    /// Run a verification suite and print one report per instance.
    Verify(VerifyArgs),
    /// List catalog instances satisfying the standing hypotheses.
    Catalog(CatalogArgs),
}

#[derive(Subcommand)]
enum RingCmd {
    /// Build a ring and print its descriptor as JSON.
    Build {
        /// Odd prime p.
        #[arg(long)]
        p: u64,
        /// Number of significant p-adic digits.
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        n: u32,
        /// Orders of roots of unity the ring must contain (comma-separated).
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
    },
}

#[derive(Subcommand)]
enum CharsCmd {
    /// List the Dirichlet characters of modulus f.
    List {
        /// Modulus.
        #[arg(long)]
        f: u64,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

/// Parameters selecting one branch series.
#[derive(Args)]
struct BranchArgs {
    /// Odd prime p, split for the character: chi(p) = 1.
    #[arg(long)]
    p: u64,
    /// Conductor of the character.
    #[arg(long)]
    f: u64,
    /// Character index within `chars list --f F`.
    #[arg(long)]
    chi: u64,
    /// Twist exponent j (defaults to 0 for even characters, 1 for odd).
    #[arg(long)]
    j: Option<u64>,
    /// Significant p-adic digits N.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    n: u32,
    /// Power-series truncation length M.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    m: usize,
    /// Tower level (defaults to the smallest level with p^level > M).
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Subcommand)]
enum LpCmd {
    /// Build (or load from cache) a branch series; print its descriptor.
    Build {
        #[command(flatten)]
        branch: BranchArgs,
    },
    /// Build (or load) a branch series and evaluate it at s.
    Eval {
        #[command(flatten)]
        branch: BranchArgs,
        /// Evaluation point s.
        #[arg(long, allow_hyphen_values = true)]
        s: i64,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// interpolation | kronecker | height-even | ferrero-greenberg | coleman | all.
    suite: String,
    /// Run every applicable catalog instance instead of a single one.
    #[arg(long)]
    all: bool,
    /// Largest conductor scanned by --all.
    #[arg(long, default_value_t = 8)]
    f_max: u64,
    /// Largest prime scanned by --all.
    #[arg(long, default_value_t = 13)]
    p_max: u64,
    /// Odd prime p of a single instance.
    #[arg(long)]
    p: Option<u64>,
    /// Conductor of a single instance (with --chi).
    #[arg(long)]
    f: Option<u64>,
    /// Character index of a single instance (with --f).
    #[arg(long)]
    chi: Option<u64>,
    /// Negative fundamental discriminant; selects the odd quadratic character.
    #[arg(long, allow_hyphen_values = true)]
    disc: Option<i64>,
    /// Override the ring precision N.
    #[arg(long)]
    n: Option<u32>,
    /// Override the series truncation M.
    #[arg(long)]
    m: Option<usize>,
    /// Override the tower level.
    #[arg(long)]
    level: Option<u32>,
    /// Emit JSON reports instead of tables.
    #[arg(long)]
    json: bool,
    /// Also write one JSON report file per (instance, suite) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker-pool size (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Largest conductor scanned.
    #[arg(long, default_value_t = 8)]
    f_max: u64,
    /// Largest prime scanned.
    #[arg(long, default_value_t = 13)]
    p_max: u64,
    /// Restrict to one parity.
    #[arg(long, value_enum, default_value_t = ParityArg::Both)]
    parity: ParityArg,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => match err.downcast_ref::<padicl_core::Error>() {
            Some(e) if is_precision_shortfall(e) => {
                eprintln!("skipped: precision insufficient: {e}");
                ExitCode::from(3)
            }
            _ => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        },
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Ring {
            action: RingCmd::Build { p, n, orders },
        } => {
            warn_thin_precision(n);
            let ring = UnramifiedWitnessRing::build(p, n, &orders)?;
            println!("{}", serde_json::to_string_pretty(&ring.descriptor())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Chars {
            action: CharsCmd::List { f, json },
        } => cmd_chars(f, json),
        Command::Lp {
            action: LpCmd::Build { branch },
        } => {
            let (spec, j, series) = build_branch(&branch)?;
            let summary = BranchSummary {
                n_eff: series.n_eff(),
                twist: j,
                regularizer: series.regularizer(),
                label: spec.label(),
                branch: series.descriptor(),
            };
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Lp {
            action: LpCmd::Eval { branch, s },
        } => {
            let (_, _, series) = build_branch(&branch)?;
            let value = series.lp_eval(s)?;
            let q = Quantity::from_elem(&format!("lp({s})"), &value);
            println!("{}", serde_json::to_string_pretty(&q)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => cmd_verify(args),
        Command::Catalog(args) => cmd_catalog(args),
    }
}

/// Wrapper around a branch descriptor with the derived quantities a
/// caller usually wants without re-deriving them.
#[derive(Serialize)]
struct BranchSummary {
    n_eff: u32,
    twist: u64,
    regularizer: u64,
    label: String,
    branch: BranchSeriesDescriptor,
}

/// Branch source honoring `PADIC_CACHE_DIR` when it is set.  Values are
/// identical with or without the cache; only construction time differs.
struct CachingBuild {
    dir: Option<PathBuf>,
}

impl CachingBuild {
    fn from_env() -> Self {
        CachingBuild {
            dir: env::var_os("PADIC_CACHE_DIR").map(PathBuf::from),
        }
    }
}

impl BranchProvider for CachingBuild {
    fn branch(
        &self,
        ring: &UnramifiedWitnessRing,
        chi: &DirichletCharacter,
        j: u64,
        level: u32,
        m_len: usize,
    ) -> padicl_core::Result<BranchSeries> {
        let Some(dir) = &self.dir else {
            return build_series(ring, chi, j, level, m_len);
        };
        let params = cache::branch_params(ring, chi, j, level, m_len);
        if let Some(found) = cache::load(dir, &params) {
            return Ok(found);
        }
        let branch = build_series(ring, chi, j, level, m_len)?;
        cache::store(dir, &params, &branch);
        Ok(branch)
    }
}

/// Smallest tower level whose sweep resolves every stored coefficient:
/// p^level > M, with a floor of two layers so norm coherence is a real
/// constraint.
fn minimal_level(p: u64, m: usize) -> u32 {
    let mut level = 1u32;
    let mut power = p;
    while power <= m as u64 {
        level += 1;
        power = power.saturating_mul(p);
    }
    level.max(2)
}

fn warn_thin_precision(n: u32) {
    if n <= 1 {
        eprintln!(
            "warning: N = {n} leaves no digits below the leading one; \
             logarithms vanish and most identities hold vacuously"
        );
    }
}

fn build_branch(args: &BranchArgs) -> Result<(InstanceSpec, u64, BranchSeries)> {
    warn_thin_precision(args.n);
    let chi = character(args.f, args.chi)?;
    let spec = InstanceSpec::new(args.p, chi)?
        .with_precision(args.n)
        .with_truncation(args.m)
        .with_level(args.level.unwrap_or_else(|| minimal_level(args.p, args.m)));
    let j = args.j.unwrap_or(match spec.chi().parity() {
        Parity::Even => 0,
        Parity::Odd => 1,
    });
    let ring = spec.build_ring()?;
    let series = CachingBuild::from_env().branch(&ring, spec.chi(), j, spec.level(), spec.m_len())?;
    Ok((spec, j, series))
}

fn parity_str(parity: Parity) -> &'static str {
    match parity {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

#[derive(Serialize)]
struct CharRow {
    index: u64,
    order: u64,
    parity: &'static str,
    conductor: u64,
    primitive: bool,
}

fn cmd_chars(f: u64, json: bool) -> Result<ExitCode> {
    let rows: Vec<CharRow> = characters_mod(f)
        .iter()
        .map(|chi| CharRow {
            index: chi.index(),
            order: chi.order(),
            parity: parity_str(chi.parity()),
            conductor: chi.conductor(),
            primitive: chi.is_primitive(),
        })
        .collect();
    if rows.is_empty() {
        bail!("no characters of modulus {f}");
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!("{:<6} {:<6} {:<7} {:<10} {}", "index", "order", "parity", "conductor", "primitive");
        for r in rows {
            println!(
                "{:<6} {:<6} {:<7} {:<10} {}",
                r.index, r.order, r.parity, r.conductor, r.primitive
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CatalogRow {
    p: u64,
    f: u64,
    chi: u64,
    order: u64,
    parity: &'static str,
    level: u32,
    n_eff: u32,
}

fn cmd_catalog(args: CatalogArgs) -> Result<ExitCode> {
    let parity = match args.parity {
        ParityArg::Even => Some(Parity::Even),
        ParityArg::Odd => Some(Parity::Odd),
        ParityArg::Both => None,
    };
    let rows: Vec<CatalogRow> = catalog_search(args.f_max, args.p_max, parity)
        .iter()
        .map(|spec| CatalogRow {
            p: spec.p(),
            f: spec.chi().conductor(),
            chi: spec.chi().index(),
            order: spec.chi().order(),
            parity: parity_str(spec.chi().parity()),
            level: spec.level(),
            n_eff: spec.n_eff(),
        })
        .collect();
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!(
            "{:<4} {:<4} {:<5} {:<6} {:<7} {:<6} {}",
            "p", "f", "chi", "order", "parity", "level", "n_eff"
        );
        for r in rows {
            println!(
                "{:<4} {:<4} {:<5} {:<6} {:<7} {:<6} {}",
                r.p, r.f, r.chi, r.order, r.parity, r.level, r.n_eff
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn select_instances(args: &VerifyArgs, suite: Suite) -> Result<Vec<InstanceSpec>> {
    let base: Vec<InstanceSpec> = if args.all {
        if args.p.is_some() || args.f.is_some() || args.chi.is_some() || args.disc.is_some() {
            bail!("--all cannot be combined with a single-instance selector");
        }
        catalog_search(args.f_max, args.p_max, None)
            .into_iter()
            .filter(|spec| match suite {
                Suite::All => true,
                single => applicable_suites(spec.chi().parity()).contains(&single),
            })
            .collect()
    } else {
        let p = args.p.ok_or_else(|| anyhow!("missing --p (or pass --all)"))?;
        let chi = match (args.disc, args.f, args.chi) {
            (Some(d), None, None) => quadratic_character(d)?,
            (None, Some(f), Some(idx)) => character(f, idx)?,
            _ => bail!("select the character with either --disc D or both --f F and --chi IDX"),
        };
        vec![InstanceSpec::new(p, chi)?]
    };
    Ok(base
        .into_iter()
        .map(|mut spec| {
            if let Some(n) = args.n {
                spec = spec.with_precision(n);
            }
            if let Some(m) = args.m {
                spec = spec.with_truncation(m);
            }
            if let Some(level) = args.level {
                spec = spec.with_level(level);
            }
            spec
        })
        .collect())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let suite = Suite::parse(&args.suite).ok_or_else(|| {
        anyhow!(
            "unknown suite {:?} (expected interpolation, kronecker, height-even, \
             ferrero-greenberg, coleman, or all)",
            args.suite
        )
    })?;
    if let Some(n) = args.n {
        warn_thin_precision(n);
    }
    let specs = select_instances(&args, suite)?;
    if specs.is_empty() {
        bail!("no instance matched the selection");
    }

    let provider = CachingBuild::from_env();
    let run_one = |spec: &InstanceSpec| run_suite_with(&provider, spec, suite);
    let results: Vec<padicl_core::Result<Vec<Report>>> = match args.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()?
            .install(|| specs.par_iter().map(run_one).collect()),
        None => specs.par_iter().map(run_one).collect(),
    };

    let mut reports = Vec::new();
    for (spec, result) in specs.iter().zip(results) {
        match result {
            Ok(batch) => reports.extend(batch),
            Err(e) if is_precision_shortfall(&e) => reports.push(skip_report(
                spec,
                suite,
                &format!("precision insufficient: {e}"),
            )),
            Err(e) => return Err(e).with_context(|| format!("instance {}", spec.label())),
        }
    }

    emit_reports(&reports, args.json, args.out.as_deref())?;
    Ok(ExitCode::from(exit_code_for(&reports)))
}

fn emit_reports(reports: &[Report], json: bool, out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    for report in reports {
        if json {
            print!("{}", report.to_json());
        } else {
            println!("{}", report.render_table());
        }
        if let Some(dir) = out {
            let name = format!(
                "{}-p{}-f{}-chi{}.json",
                report.suite, report.instance.p, report.instance.f, report.instance.index
            );
            fs::write(dir.join(name), report.to_json())?;
        }
    }
    Ok(())
}

/// `0`: every verdict passed; `1`: some identity failed; `3`: nothing
/// failed but at least one check was skipped as undecidable.
fn exit_code_for(reports: &[Report]) -> u8 {
    if reports
        .iter()
        .any(|r| r.verdicts.iter().any(|v| !v.pass))
    {
        1
    } else if reports.iter().any(|r| r.skipped()) {
        3
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use padicl_core::report::{InstanceLabel, Verdict};

    fn blank_report() -> Report {
        Report {
            instance: InstanceLabel {
                p: 7,
                f: 8,
                index: 1,
                parity: "even".into(),
                n: 12,
                m: 16,
                level: 2,
            },
            suite: "kronecker".into(),
            quantities: vec![],
            verdicts: vec![],
            skips: vec![],
        }
    }

    fn verdict(pass: bool) -> Verdict {
        Verdict {
            identity: "x".into(),
            pass,
            agreement_exponent: 0,
        }
    }

    #[test]
    fn exit_codes_rank_failures_over_skips() {
        let mut passing = blank_report();
        passing.verdicts.push(verdict(true));
        let mut failing = blank_report();
        failing.verdicts.push(verdict(false));
        let mut skipped = blank_report();
        skipped.skips.push("undecidable".into());

        assert_eq!(exit_code_for(&[passing.clone()]), 0);
        assert_eq!(exit_code_for(&[passing.clone(), skipped.clone()]), 3);
        assert_eq!(exit_code_for(&[failing.clone(), skipped.clone()]), 1);
        assert_eq!(exit_code_for(&[passing, failing]), 1);
    }

    #[test]
    fn minimal_level_clears_the_truncation() {
        assert_eq!(minimal_level(7, 16), 2);
        assert_eq!(minimal_level(5, 16), 2);
        assert_eq!(minimal_level(5, 30), 3);
        // Floor of two layers even when p alone exceeds M.
        assert_eq!(minimal_level(17, 16), 2);
    }

    #[test]
    fn instance_selection_validates_combinations() {
        let base = VerifyArgs {
            suite: "all".into(),
            all: false,
            f_max: 8,
            p_max: 13,
            p: Some(7),
            f: Some(8),
            chi: Some(1),
            disc: None,
            n: None,
            m: None,
            level: None,
            json: false,
            out: None,
            workers: None,
        };
        let specs = select_instances(&base, Suite::All).unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(specs[0].label(), "p7-f8-chi1");

        let disc = VerifyArgs {
            f: None,
            chi: None,
            disc: Some(-4),
            p: Some(13),
            ..base
        };
        let specs = select_instances(&disc, Suite::FerreroGreenberg).unwrap();
        assert_eq!(specs[0].label(), "p13-f4-chi1");

        let conflicting = VerifyArgs {
            all: true,
            p: Some(7),
            f: None,
            chi: None,
            disc: None,
            ..disc
        };
        assert!(select_instances(&conflicting, Suite::All).is_err());
    }

    #[test]
    fn sweep_filters_by_suite_applicability() {
        let sweep = VerifyArgs {
            suite: "kronecker".into(),
            all: true,
            f_max: 8,
            p_max: 13,
            p: None,
            f: None,
            chi: None,
            disc: None,
            n: None,
            m: None,
            level: None,
            json: false,
            out: None,
            workers: None,
        };
        let specs = select_instances(&sweep, Suite::Kronecker).unwrap();
        assert!(!specs.is_empty());
        assert!(specs.iter().all(|s| s.chi().parity() == Parity::Even));
    }
}
