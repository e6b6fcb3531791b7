use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// `case N` or the scenario path.
    pub scenario: String,
    pub seed: u64,
    pub output_dir: String,
    /// SHA-256 of the scenario snapshot written with the run.
    pub spec_sha256: String,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn record(&mut self, dir: &Path, name: &str) -> anyhow::Result<()> {
        let bytes = fs::read(dir.join(name)).with_context(|| format!("reading {name}"))?;
        let entry = FileEntry {
            name: name.to_string(),
            sha256: sha256_hex(&bytes),
        };
        match self.files.iter_mut().find(|f| f.name == name) {
            Some(f) => *f = entry,
            None => self.files.push(entry),
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> anyhow::Result<Option<RunManifest>> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?))
    }

    /// Writes through a temporary file and a rename, so readers never see a
    /// partial manifest.
    pub fn store(&self, dir: &Path) -> anyhow::Result<()> {
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(serde_json::to_string_pretty(self)?.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
