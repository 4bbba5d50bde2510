//! Byte-stable CSV and JSON emission.
//!
//! CSV files carry '#'-prefixed metadata comment lines, a header row, LF line
//! endings, '.' decimals, and floats printed with 17 significant digits so
//! values round-trip exactly and outputs are byte-identical across runs.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// One scalar column value.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub source: String,
    pub config_sha256: String,
    pub backend: String,
    pub units: Vec<(String, String)>,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, source: &str, config_sha256: &str, backend: &str) -> Self {
        Self {
            tool: "pairsim".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            source: source.to_string(),
            config_sha256: config_sha256.to_string(),
            backend: backend.to_string(),
            units: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn unit(mut self, column: &str, unit: &str) -> Self {
        self.units.push((column.to_string(), unit.to_string()));
        self
    }

    pub fn extra(mut self, key: &str, value: String) -> Self {
        self.extra.push((key.to_string(), value));
        self
    }

    fn comment_lines(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# {} v{}\n", self.tool, self.version));
        s.push_str(&format!("# command: {}\n", self.command));
        s.push_str(&format!("# source: {}\n", self.source));
        s.push_str(&format!("# config_sha256: {}\n", self.config_sha256));
        s.push_str(&format!("# backend: {}\n", self.backend));
        for (c, u) in &self.units {
            s.push_str(&format!("# unit: {c} = {u}\n"));
        }
        for (k, v) in &self.extra {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }

    fn json_value(&self, columns: &[&str]) -> serde_json::Value {
        let mut units = serde_json::Map::new();
        for (c, u) in &self.units {
            units.insert(c.clone(), serde_json::Value::String(u.clone()));
        }
        let mut extra = serde_json::Map::new();
        for (k, v) in &self.extra {
            extra.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        serde_json::json!({
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "source": self.source,
            "config_sha256": self.config_sha256,
            "backend": self.backend,
            "columns": columns,
            "units": units,
            "metadata": extra,
        })
    }
}

/// A curve ready for export: strictly monotone x values, one or more y
/// columns, and the complete metadata block.
pub struct CurveOutput {
    pub x_name: String,
    pub x: Vec<f64>,
    pub y_columns: Vec<(String, Vec<f64>)>,
    pub meta: Metadata,
}

impl CurveOutput {
    pub fn new(x_name: &str, x: Vec<f64>, meta: Metadata) -> CliResult<Self> {
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config(
                "curve x values must be strictly increasing".to_string(),
            ));
        }
        Ok(Self {
            x_name: x_name.to_string(),
            x,
            y_columns: Vec::new(),
            meta,
        })
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> CliResult<()> {
        if values.len() != self.x.len() {
            return Err(CliError::Config(format!(
                "column {name} has {} values for {} x points",
                values.len(),
                self.x.len()
            )));
        }
        self.y_columns.push((name.to_string(), values));
        Ok(())
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut columns = vec![self.x_name.as_str()];
        columns.extend(self.y_columns.iter().map(|(n, _)| n.as_str()));
        let rows: Vec<Vec<String>> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let mut row = vec![fmt(x)];
                row.extend(self.y_columns.iter().map(|(_, v)| fmt(v[i])));
                row
            })
            .collect();
        write_table(path, &self.meta, &columns, &rows)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.to_path_buf();
    let ext = match p.extension().and_then(|e| e.to_str()) {
        Some(e) => format!("{e}.json"),
        None => "json".to_string(),
    };
    p.set_extension(ext);
    p
}

/// Write a CSV table plus its JSON metadata sidecar.
pub fn write_table(
    path: &Path,
    meta: &Metadata,
    columns: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut body = meta.comment_lines();
    body.push_str(&columns.join(","));
    body.push('\n');
    for row in rows {
        body.push_str(&row.join(","));
        body.push('\n');
    }
    write_atomic(path, body.as_bytes())?;

    let sidecar = serde_json::to_string_pretty(&meta.json_value(columns))
        .map_err(|e| CliError::Io(format!("sidecar serialization: {e}")))?;
    write_atomic(&sidecar_path(path), format!("{sidecar}\n").as_bytes())?;
    Ok(())
}

/// Write a standalone JSON report.
pub fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("report serialization: {e}")))?;
    write_atomic(path, format!("{text}\n").as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}
