//! Output files with an embedded tool/config header, plus stdout summaries.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cascade_lens::Result;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;

pub const TOOL: &str = "cascade-lens";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stage seed from the user seed: first 8 bytes of SHA-256 over
/// `(seed, stage, index)`.
pub fn derive_seed(seed: u64, stage: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    h.update([0u8]);
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// Writes artifacts into one directory, each stamped with the run config.
pub struct Artifacts {
    dir: PathBuf,
    config: Value,
}

impl Artifacts {
    pub fn new(dir: &Path, config: Value) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Opens `name` and writes the `# ` comment preamble; the caller adds the CSV body.
    pub fn csv(&self, name: &str) -> Result<BufWriter<File>> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        writeln!(w, "# {TOOL} {VERSION}")?;
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        Ok(w)
    }

    /// `{"tool", "version", "config", <key>: body}`, pretty-printed.
    pub fn json<T: Serialize>(&self, name: &str, key: &str, body: &T) -> Result<()> {
        let mut doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "config": self.config,
        });
        doc[key] = serde_json::to_value(body)?;
        let mut w = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Run config as echoed into artifacts: the parsed command without output
/// locations or thread counts.
pub fn config_value<T: Serialize>(command: &T) -> Result<Value> {
    Ok(json!({ "tool": TOOL, "version": VERSION, "run": serde_json::to_value(command)? }))
}

/// Key/value summary for stdout.
#[derive(Debug, Default)]
pub struct Summary(Vec<(String, Value)>);

impl Summary {
    pub fn add(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn print(&self, format: Format) -> Result<()> {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        match format {
            Format::Json => {
                let map: serde_json::Map<String, Value> = self.0.iter().cloned().collect();
                serde_json::to_writer_pretty(&mut out, &map)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(self.0.iter().map(|(k, _)| k.as_str()))?;
                w.write_record(self.0.iter().map(|(_, v)| match v {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                }))?;
                w.flush()?;
            }
        }
        Ok(())
    }
}
