//! Run manifests: enough to re-run a command and check its outputs byte for byte.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    pub argv: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_path: Option<PathBuf>,
    /// Digest of the resolved settings after merging file and flags.
    pub config_sha256: String,
    pub settings: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a file, or of every file under a directory in path order
/// (run manifests excluded).
pub fn sha256_path(path: &Path) -> std::io::Result<String> {
    let mut hasher = Sha256::new();
    if path.is_dir() {
        let mut files = Vec::new();
        collect_files(path, &mut files)?;
        files.sort();
        for f in files {
            let rel = f.strip_prefix(path).unwrap_or(&f);
            hasher.update(rel.to_string_lossy().as_bytes());
            hasher.update([0]);
            hasher.update(std::fs::read(&f)?);
        }
    } else {
        let mut file = std::fs::File::open(path)?;
        let mut buf = [0u8; 1 << 16];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            collect_files(&p, out)?;
        } else if !p.to_string_lossy().ends_with(".manifest.json") {
            out.push(p);
        }
    }
    Ok(())
}

pub fn digest_all(paths: &[PathBuf]) -> std::io::Result<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: sha256_path(p)?,
            })
        })
        .collect()
}

/// Default manifest location for a primary output.
pub fn manifest_path_for(primary: &Path) -> PathBuf {
    if primary.is_dir() {
        return primary.join("run.manifest.json");
    }
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

/// Outputs whose current digest differs from the recorded one.
pub fn mismatches(recorded: &[FileDigest]) -> Vec<String> {
    recorded
        .iter()
        .filter_map(|d| match sha256_path(&d.path) {
            Ok(h) if h == d.sha256 => None,
            Ok(h) => Some(format!("{}: expected {}, found {h}", d.path.display(), d.sha256)),
            Err(e) => Some(format!("{}: {e}", d.path.display())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_files_and_directories() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        std::fs::write(&a, "abc").unwrap();
        assert_eq!(
            sha256_path(&a).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let d1 = sha256_path(dir.path()).unwrap();
        std::fs::write(dir.path().join("b.txt"), "x").unwrap();
        assert_ne!(d1, sha256_path(dir.path()).unwrap());
        let digests = digest_all(std::slice::from_ref(&a)).unwrap();
        assert!(mismatches(&digests).is_empty());
        std::fs::write(&a, "abd").unwrap();
        assert_eq!(mismatches(&digests).len(), 1);
    }

    #[test]
    fn manifest_next_to_output() {
        assert_eq!(manifest_path_for(Path::new("out/pairs.tsv")), Path::new("out/pairs.tsv.manifest.json"));
    }
}
