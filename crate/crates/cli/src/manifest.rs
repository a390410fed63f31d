//! Run manifests: every CLI invocation writes exactly one manifest next to
//! its primary output, recording parameters, seed, and 64-bit digests of all
//! output files. Identical parameters + seed must reproduce identical output
//! digests.

use anyhow::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// FNV-1a 64-bit.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn digest_file(path: &Path) -> Result<u64> {
    Ok(fnv64(&fs::read(path)?))
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub fnv64: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Sorted parameter map; the canonical identity of the run.
    pub params: BTreeMap<String, String>,
    pub master_seed: u64,
    pub version: String,
    pub params_checksum: String,
    pub duration_secs: f64,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: BTreeMap<String, String>, master_seed: u64) -> Self {
        let params_checksum = format!("{:016x}", params_digest(subcommand, &params));
        Self {
            subcommand: subcommand.to_string(),
            params,
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            params_checksum,
            duration_secs: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(OutputDigest {
            path: path.display().to_string(),
            fnv64: format!("{:016x}", digest_file(path)?),
        });
        Ok(())
    }

    /// Writes `<primary_out>.manifest.json`.
    pub fn write(&self, primary_out: &Path) -> Result<PathBuf> {
        let mut path = primary_out.as_os_str().to_owned();
        path.push(".manifest.json");
        let path = PathBuf::from(path);
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

fn params_digest(subcommand: &str, params: &BTreeMap<String, String>) -> u64 {
    let mut canon = String::from(subcommand);
    for (k, v) in params {
        canon.push('\u{1f}');
        canon.push_str(k);
        canon.push('=');
        canon.push_str(v);
    }
    fnv64(canon.as_bytes())
}

/// Round-trip-exact double serialization (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The commented header line every output CSV starts with.
pub fn csv_header(manifest: &RunManifest, columns: &str) -> String {
    format!(
        "# rmdl {} columns={} manifest={}\n",
        manifest.subcommand, columns, manifest.params_checksum
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_vectors() {
        assert_eq!(fnv64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv64(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn checksum_depends_on_params() {
        let mut p = BTreeMap::new();
        p.insert("r".into(), "2".into());
        let a = RunManifest::new("conv", p.clone(), 0);
        p.insert("r".into(), "3".into());
        let b = RunManifest::new("conv", p, 0);
        assert_ne!(a.params_checksum, b.params_checksum);
    }

    #[test]
    fn float_round_trip() {
        for x in [0.1, std::f64::consts::PI, 1e-300, -7.25e17] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
