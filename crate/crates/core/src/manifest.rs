//! Run manifests: what was run, with which configuration, and what it wrote.
//!
//! The configuration hash is the SHA-256 of the canonical JSON serialisation
//! of the resolved run configuration, so two runs with equal hashes were
//! asked to compute the same thing. Output files are hashed as well, which
//! makes byte-for-byte reproducibility of exact-mode outputs checkable from
//! the manifests alone.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// File name of the manifest inside the output directory.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Lower-case hexadecimal SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of any serialisable configuration (canonical JSON).
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_vec(cfg).expect("configuration serialises to JSON");
    sha256_hex(&json)
}

/// Library versions recorded in every manifest.
#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub implode_core: &'static str,
    pub gmp: String,
    pub mpfr: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            implode_core: env!("CARGO_PKG_VERSION"),
            gmp: format!(
                "{}.{}.{}",
                gmp_mpfr_sys::gmp::VERSION,
                gmp_mpfr_sys::gmp::VERSION_MINOR,
                gmp_mpfr_sys::gmp::VERSION_PATCHLEVEL
            ),
            mpfr: format!(
                "{}.{}.{}",
                gmp_mpfr_sys::mpfr::VERSION_MAJOR,
                gmp_mpfr_sys::mpfr::VERSION_MINOR,
                gmp_mpfr_sys::mpfr::VERSION_PATCHLEVEL
            ),
        }
    }
}

/// One file written by a run.
#[derive(Clone, Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of a single run.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest<C: Serialize> {
    pub command: String,
    pub config: C,
    pub config_hash: String,
    pub versions: Versions,
    pub workers: usize,
    pub wall_time_s: f64,
    pub success: bool,
    /// Failing stage or check, when `success` is false.
    pub failure: Option<String>,
    pub outputs: Vec<OutputFile>,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: &str, config: C, workers: usize) -> Self {
        let config_hash = config_hash(&config);
        Self {
            command: command.to_string(),
            config,
            config_hash,
            versions: Versions::current(),
            workers,
            wall_time_s: 0.0,
            success: false,
            failure: None,
            outputs: vec![],
        }
    }

    /// Writes `bytes` to `dir/name` and records its hash.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, bytes)?;
        self.outputs.push(OutputFile { path: path.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(path)
    }

    /// Writes the manifest itself to `dir/manifest.json`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(&path, json)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn equal_configs_hash_equally() {
        #[derive(Serialize)]
        struct C {
            a: u32,
            b: &'static str,
        }
        assert_eq!(config_hash(&C { a: 1, b: "x" }), config_hash(&C { a: 1, b: "x" }));
        assert_ne!(config_hash(&C { a: 1, b: "x" }), config_hash(&C { a: 2, b: "x" }));
    }
}
