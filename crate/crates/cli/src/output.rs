use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata written as `#` comment lines at the top of every output file.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub extra: Vec<String>,
}

impl Header {
    /// Hash the canonical TOML rendering of `config`; output paths must not
    /// be part of it so that relocated reruns stay byte-identical.
    pub fn new<T: Serialize>(command: &'static str, config: &T, seed: Option<u64>) -> Result<Self> {
        let canonical = toml::to_string(config).context("serialising config for hashing")?;
        let config_hash = hex::encode(Sha256::digest(canonical.as_bytes()));
        Ok(Header { command, config_hash, seed, extra: Vec::new() })
    }

    pub fn with(mut self, line: impl Into<String>) -> Self {
        self.extra.push(line.into());
        self
    }

    pub fn render(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let mut s = format!(
            "# relaydmt {VERSION}\n# command: {}\n# config_sha256: {}\n# seed: {seed}\n",
            self.command, self.config_hash
        );
        for line in &self.extra {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

pub struct OutputDir {
    pub root: PathBuf,
    pub create: bool,
}

impl OutputDir {
    pub fn ensure(&self, dir: &Path) -> std::result::Result<(), Failure> {
        if dir.as_os_str().is_empty() || dir.is_dir() {
            return Ok(());
        }
        if !self.create {
            return Err(Failure::Validation(anyhow::anyhow!(
                "output directory {} does not exist (remove --no-create to create it)",
                dir.display()
            )));
        }
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))
            .map_err(Failure::Io)
    }

    /// `path` if given (relative paths are taken as-is), else `root/default_name`.
    pub fn resolve(&self, path: Option<&Path>, default_name: &str) -> PathBuf {
        path.map_or_else(|| self.root.join(default_name), Path::to_path_buf)
    }

    pub fn write(&self, path: &Path, header: &Header, body: &str) -> std::result::Result<(), Failure> {
        if let Some(parent) = path.parent() {
            self.ensure(parent)?;
        }
        let mut text = header.render();
        text.push_str(body);
        fs::write(path, text).with_context(|| format!("writing {}", path.display())).map_err(Failure::Io)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}
