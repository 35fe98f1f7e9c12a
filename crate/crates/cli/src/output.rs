//! Inputs with checksums, atomic file writes and the reproducibility header.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use rydberg_vqe::fixtures;
use rydberg_vqe::pauli::{parse_hamiltonian, PauliHamiltonian};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Text of an input file plus its checksum, keyed by how it was named.
#[derive(Debug, Clone)]
pub struct Input {
    pub name: String,
    pub text: String,
    pub sha256: String,
}

impl Input {
    /// Reads `spec`, where `fixture:<name>` selects a bundled Hamiltonian.
    pub fn read(spec: &str) -> Result<Self> {
        let text = match spec.strip_prefix("fixture:") {
            Some(name) => fixture_text(name)
                .with_context(|| format!("unknown fixture `{name}` (lih, beh2, h2_jw, h2_bk_eff)"))?
                .to_string(),
            None => std::fs::read_to_string(spec).with_context(|| format!("cannot read {spec}"))?,
        };
        Ok(Input {
            name: spec.to_string(),
            sha256: sha256_hex(text.as_bytes()),
            text,
        })
    }

    pub fn hamiltonian(&self) -> Result<PauliHamiltonian> {
        parse_hamiltonian(&self.text).with_context(|| format!("in {}", self.name))
    }

    pub fn json<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_str(&self.text).with_context(|| format!("invalid JSON in {}", self.name))
    }
}

fn fixture_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "lih" => fixtures::LIH_TEXT,
        "beh2" => fixtures::BEH2_TEXT,
        "h2_jw" => fixtures::H2_JW_TEXT,
        "h2_bk_eff" => fixtures::H2_BK_EFF_TEXT,
        _ => return None,
    })
}

/// Output directory; every file lands via a temporary file and a rename.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let target = self.path(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target)
            .with_context(|| format!("cannot write {}", target.display()))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// One JSON document per line.
    pub fn write_jsonl<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let mut buf = Vec::new();
        for r in rows {
            serde_json::to_writer(&mut buf, r)?;
            buf.push(b'\n');
        }
        self.write_bytes(name, &buf)
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        self.write_bytes(name, &w.into_inner()?)
    }
}

/// Everything needed to rerun a command and get identical outputs.
#[derive(Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub jobs: usize,
    pub config: crate::config::RunConfig,
    pub inputs: BTreeMap<String, String>,
}

impl Header {
    pub fn new(command: &str, cfg: &crate::config::RunConfig, jobs: usize, inputs: &[&Input]) -> Self {
        Header {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            argv: std::env::args().collect(),
            seed: cfg.seed,
            jobs,
            config: cfg.clone(),
            inputs: inputs.iter().map(|i| (i.name.clone(), i.sha256.clone())).collect(),
        }
    }

    pub fn write(&self, out: &OutDir) -> Result<PathBuf> {
        out.write_json(&format!("{}.header.json", self.command), self)
    }
}
