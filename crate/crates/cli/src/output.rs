use std::fmt::Display;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use recordlab::Error as CoreError;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::Embedded;

/// Writes one file per table, each stamped with the resolved config.
pub struct Output {
    dir: PathBuf,
    config: Embedded,
}

impl Output {
    pub fn create(dir: &Path, config: Embedded) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        let out = Self {
            dir: dir.to_path_buf(),
            config,
        };
        out.write("run_config.json", pretty(&out.config.to_value()))?;
        Ok(out)
    }

    fn write(&self, name: &str, body: String) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    pub fn tsv(&self, name: &str, body: &str) -> Result<()> {
        self.write(name, format!("{}{body}", self.config.comment_line()))
    }

    /// Writes `doc` (an object) with the config under `"config"`.
    pub fn json(&self, name: &str, doc: Value) -> Result<()> {
        let mut map = Map::new();
        map.insert("config".into(), self.config.to_value());
        match doc {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("data".into(), other);
            }
        }
        self.write(name, pretty(&Value::Object(map)))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

/// Outcome of an optional analysis step, as stored in its JSON file.
pub fn ok<T: Serialize>(v: &T) -> Value {
    json!({ "status": "ok", "result": to_value(v) })
}

pub fn not_applicable(reason: impl Display) -> Value {
    warn(format_args!("{reason}"));
    json!({ "status": "not_applicable", "reason": reason.to_string() })
}

/// Convergence failures are reported as `failed`; everything else (too few
/// samples, degenerate data) means the step does not apply to this input.
pub fn from_error(err: &CoreError) -> Value {
    let status = match err {
        CoreError::PowerLawNotConverged { .. } | CoreError::GevNotConverged { .. } => "failed",
        _ => "not_applicable",
    };
    warn(format_args!("{err}"));
    json!({ "status": status, "reason": err.to_string() })
}

pub fn warn(msg: std::fmt::Arguments) {
    eprintln!("warning: {msg}");
}
