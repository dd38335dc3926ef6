//! CSV formatting, artifact writing and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// `20·log10(x)`; zero magnitudes print as `-inf`.
pub fn mag_db(x: f64) -> f64 {
    20.0 * x.log10()
}

/// A CSV body assembled in memory.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut text = String::with_capacity(1 << 16);
        text.push_str(header);
        text.push('\n');
        Csv { text }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(f.as_ref());
        }
        self.text.push('\n');
    }

    pub fn push_raw(&mut self, body: &str) {
        self.text.push_str(body);
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: Config,
    pub outputs: Vec<OutputFile>,
    pub started_unix_s: f64,
    pub timings: Vec<Timing>,
}

/// Writes artifacts into the output directory and tracks checksums.
pub struct Writer {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
    stage: Instant,
}

impl Writer {
    pub fn new(command: &str, config: &Config) -> Result<Self> {
        let dir = config.run.out_dir.clone();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating output dir {}", dir.display()))?;
        let started_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Ok(Writer {
            dir,
            manifest: RunManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.run.seed,
                config: config.clone(),
                outputs: Vec::new(),
                started_unix_s,
                timings: Vec::new(),
            },
            started: Instant::now(),
            stage: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Closes the current timing stage.
    pub fn lap(&mut self, stage: &str) {
        self.manifest.timings.push(Timing {
            stage: stage.to_string(),
            seconds: self.stage.elapsed().as_secs_f64(),
        });
        self.stage = Instant::now();
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.manifest.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
            bytes: body.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.write(name, &body)
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(mut self) -> Result<RunManifest> {
        self.manifest.timings.push(Timing {
            stage: "total".to_string(),
            seconds: self.started.elapsed().as_secs_f64(),
        });
        let path = self.dir.join("manifest.json");
        let mut body = serde_json::to_string_pretty(&self.manifest)?;
        body.push('\n');
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(self.manifest)
    }
}

/// Left-aligned first column, right-aligned rest.
pub fn aligned_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        for (i, cell) in cells.iter().enumerate().take(cols) {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}", w = width[0]);
            } else {
                let _ = write!(out, "  {cell:>w$}", w = width[i]);
            }
        }
        out.push('\n');
    };
    line(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for r in rows {
        line(r);
    }
    out
}
