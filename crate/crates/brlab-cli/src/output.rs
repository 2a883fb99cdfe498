use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolves output paths and stamps every artifact with the generating config.
pub struct Sink {
    out_dir: Option<PathBuf>,
    config: Value,
}

impl Sink {
    pub fn new(out_dir: Option<PathBuf>, config: Value) -> Result<Self, Failure> {
        if let Some(dir) = &out_dir {
            fs::create_dir_all(dir).map_err(|e| Failure::config("--out-dir", format!("{}: {e}", dir.display())))?;
        }
        Ok(Sink { out_dir, config })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    pub fn envelope(&self, result: impl Serialize) -> Value {
        json!({
            "tool": "brlab",
            "version": VERSION,
            "config": self.config,
            "result": result,
        })
    }

    pub fn write_json(&self, path: &Path, flag: &'static str, value: &Value) -> Result<PathBuf, Failure> {
        let target = self.resolve(path);
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        write(&target, flag, text.as_bytes())?;
        Ok(target)
    }

    /// CSV with two comment lines carrying the tool version and the config.
    pub fn write_csv<R: Serialize>(&self, path: &Path, flag: &'static str, rows: &[R]) -> Result<PathBuf, Failure> {
        let target = self.resolve(path);
        let mut buf = format!("# brlab {VERSION}\n# config {}\n", self.config).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row).map_err(|e| Failure::audit(format!("csv: {e}")))?;
            }
            w.flush().map_err(|e| Failure::audit(format!("csv: {e}")))?;
        }
        write(&target, flag, &buf)?;
        Ok(target)
    }

    pub fn print_json(&self, value: &Value) {
        println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
    }
}

fn write(target: &Path, flag: &'static str, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::config(flag, format!("{}: {e}", parent.display())))?;
    }
    fs::write(target, bytes).map_err(|e| Failure::config(flag, format!("{}: {e}", target.display())))
}

/// `domain.json` → `domain.meta.json`.
pub fn sidecar_path(domain: &Path) -> PathBuf {
    domain.with_extension("meta.json")
}
