use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<conewave::Error> for Failure {
    fn from(e: conewave::Error) -> Self {
        use conewave::Error as E;
        match e {
            E::Quadrature { .. } | E::Resolution(_) | E::NonFinite(_) => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

pub struct Outcome {
    pub summary: Value,
    pub accepted: bool,
}

/// Artifact writer: files are named `<command>-<timestamp>.<ext>`.
pub struct Output {
    dir: PathBuf,
    stamp: String,
    pub emit_plot: bool,
}

impl Output {
    pub fn new(dir: PathBuf, emit_plot: bool) -> Self {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        Self { dir, stamp: format!("{}{:03}", now.as_secs(), now.subsec_millis()), emit_plot }
    }

    pub fn path(&self, command: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{command}-{}.{ext}", self.stamp))
    }

    pub fn write(&self, command: &str, ext: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.dir)?;
        let p = self.path(command, ext);
        std::fs::write(&p, contents)?;
        Ok(p)
    }

    pub fn json<T: Serialize>(&self, command: &str, value: &T) -> Result<PathBuf, Failure> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(command, "json", text.as_bytes())
    }

    pub fn csv(&self, command: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Config(e.to_string()))?;
        self.write(command, "csv", &bytes)
    }

    /// gnuplot script reading `csv`; `body` holds the plot commands.
    pub fn plot(&self, command: &str, csv: &Path, body: &str) -> Result<Option<PathBuf>, Failure> {
        if !self.emit_plot {
            return Ok(None);
        }
        let name = csv.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let script = format!(
            "# gnuplot script for {name}\nset datafile separator ','\nset key autotitle columnhead\ndata = '{name}'\n{body}\n"
        );
        Ok(Some(self.write(command, "gp", script.as_bytes())?))
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn read_config(path: Option<&Path>, command: &str) -> Result<String, Failure> {
    let p = path.ok_or_else(|| Failure::Config(format!("--config is required for {command}")))?;
    std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))
}
