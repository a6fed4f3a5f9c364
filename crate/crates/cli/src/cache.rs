//! On-disk cache for branch series, keyed by construction parameters.
//!
//! Entries are JSON files named by the SHA-256 of a canonical parameter
//! string.  Each file records the schema tag, the parameter string, a
//! checksum of the serialized series descriptor, and the descriptor
//! itself.  A missing file, schema or parameter mismatch, failed
//! checksum, or undecodable body is treated as a miss: the caller
//! rebuilds and overwrites, so a corrupt entry heals on the next run.
//! Writes go through a temporary file in the same directory followed by
//! an atomic rename, so concurrent runs never observe a half-written
//! entry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use padicl_core::dirichlet::DirichletCharacter;
use padicl_core::iwasawa::{BranchSeries, BranchSeriesDescriptor};
use padicl_core::UnramifiedWitnessRing;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever the stored layout changes; old entries then read as
/// misses instead of decoding garbage.
const SCHEMA: &str = "padicl/branch/v1";

#[derive(Serialize, Deserialize)]
struct CacheFile {
    schema: String,
    params: String,
    checksum: String,
    branch: BranchSeriesDescriptor,
}

/// Canonical key for one branch-series build.  Everything the
/// construction depends on appears here, including the ring salt, so
/// distinct moduli never collide.
pub fn branch_params(
    ring: &UnramifiedWitnessRing,
    chi: &DirichletCharacter,
    j: u64,
    level: u32,
    m_len: usize,
) -> String {
    format!(
        "branch|p={}|n={}|orders={:?}|salt={}|f={}|chi={}|j={}|level={}|m={}",
        ring.p(),
        ring.precision(),
        ring.orders(),
        ring.salt(),
        chi.conductor(),
        chi.index(),
        j,
        level,
        m_len,
    )
}

fn entry_path(dir: &Path, params: &str) -> PathBuf {
    let digest = Sha256::digest(params.as_bytes());
    dir.join(format!("{}.json", hex::encode(digest)))
}

fn body_checksum(branch: &BranchSeriesDescriptor) -> String {
    let bytes = serde_json::to_vec(branch).expect("descriptor serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Load a cached series, or `None` when the entry is absent or unusable.
/// Corrupt entries are reported on stderr and rebuilt by the caller.
pub fn load(dir: &Path, params: &str) -> Option<BranchSeries> {
    let path = entry_path(dir, params);
    let bytes = fs::read(&path).ok()?;
    match decode(&bytes, params) {
        Ok(branch) => {
            eprintln!("cache: hit {}", path.display());
            Some(branch)
        }
        Err(why) => {
            eprintln!("cache: corrupt entry {} ({why}); rebuilding", path.display());
            None
        }
    }
}

fn decode(bytes: &[u8], params: &str) -> Result<BranchSeries, String> {
    let file: CacheFile = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    if file.schema != SCHEMA {
        return Err(format!("unknown schema {:?}", file.schema));
    }
    if file.params != params {
        return Err("parameter mismatch".into());
    }
    if file.checksum != body_checksum(&file.branch) {
        return Err("checksum mismatch".into());
    }
    BranchSeries::from_descriptor(&file.branch).map_err(|e| e.to_string())
}

/// Store a series under its parameter key.  Failures are reported and
/// swallowed: the cache is an accelerator, never a correctness
/// dependency.
pub fn store(dir: &Path, params: &str, branch: &BranchSeries) {
    if let Err(why) = try_store(dir, params, branch) {
        eprintln!("cache: could not store entry ({why})");
    }
}

fn try_store(dir: &Path, params: &str, branch: &BranchSeries) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let desc = branch.descriptor();
    let file = CacheFile {
        schema: SCHEMA.into(),
        params: params.to_string(),
        checksum: body_checksum(&desc),
        branch: desc,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, &file)?;
    tmp.write_all(b"\n")?;
    let path = entry_path(dir, params);
    tmp.persist(&path)?;
    eprintln!("cache: stored {}", path.display());
    Ok(())
}
