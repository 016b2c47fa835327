//! Provenance headers and writers for JSON reports and CSV series.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::error::CliError;

pub const TOOL_NAME: &str = "polling";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce an artifact.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub command: &'static str,
    pub config_hash: String,
    /// Fully resolved configuration and knobs.
    pub parameters: Value,
    /// Seconds since the epoch; `None` under `--deterministic`.
    pub generated_unix: Option<u64>,
}

impl RunInfo {
    pub fn new(
        command: &'static str,
        config_hash: String,
        parameters: Value,
        deterministic: bool,
    ) -> Self {
        let generated_unix = (!deterministic).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        RunInfo {
            command,
            config_hash,
            parameters,
            generated_unix,
        }
    }

    fn header_fields(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert(
            "tool".into(),
            json!({"name": TOOL_NAME, "version": TOOL_VERSION}),
        );
        m.insert("command".into(), json!(self.command));
        m.insert("config_hash".into(), json!(self.config_hash));
        m.insert("parameters".into(), self.parameters.clone());
        if let Some(t) = self.generated_unix {
            m.insert("generated_unix".into(), json!(t));
        }
        m
    }

    /// Report object with the header fields followed by `body`'s fields.
    pub fn report(&self, body: Value) -> String {
        let mut m = self.header_fields();
        match body {
            Value::Object(b) => m.extend(b),
            other => {
                m.insert("result".into(), other);
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("report serializes");
        s.push('\n');
        s
    }

    /// `#`-prefixed comment lines that open every CSV file.
    pub fn csv_preamble(&self) -> String {
        let mut s = format!(
            "# tool {TOOL_NAME} {TOOL_VERSION}\n# command {}\n# config_hash {}\n# parameters {}\n",
            self.command, self.config_hash, self.parameters
        );
        if let Some(t) = self.generated_unix {
            s.push_str(&format!("# generated_unix {t}\n"));
        }
        s
    }
}

/// CSV text: preamble, header row, then one row per record.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(info: &RunInfo, columns: &[String]) -> Self {
        let mut text = info.csv_preamble();
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(&c.to_string());
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Column names `prefix_1, ..., prefix_n`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

/// Destination of an artifact: a file, or standard output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_option(p: Option<&Path>) -> Sink {
        p.map_or(Sink::Stdout, |p| Sink::File(p.to_path_buf()))
    }

    pub fn label(&self) -> Value {
        match self {
            Sink::Stdout => Value::Null,
            Sink::File(p) => json!(p.display().to_string()),
        }
    }

    pub fn write(&self, content: &str) -> Result<(), CliError> {
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(content.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))
            }
            Sink::File(p) => std::fs::write(p, content).map_err(|e| CliError::io(p, e)),
        }
    }
}
