//! CSV/JSON tables and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::args::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(i64),
    Count(u64),
    Float(f64),
}

impl Cell {
    fn text(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Count(v) => v.to_string(),
            Cell::Float(v) => format_float(v),
        }
    }

    fn json(self) -> String {
        match self {
            Cell::Float(v) if !v.is_finite() => "null".to_string(),
            other => other.text(),
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub stem: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(stem: &'static str, columns: &'static [&'static str]) -> Self {
        Self {
            stem,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.stem),
            Format::Json => format!("{}.json", self.stem),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.text()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: &Metadata) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            model: &'a str,
            n: usize,
            params: &'a serde_json::Value,
            columns: &'a [&'a str],
            data: Vec<Vec<Box<RawValue>>>,
        }
        let data = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| RawValue::from_string(c.json()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let doc = Doc {
            schema_version: SCHEMA_VERSION,
            model: &meta.model,
            n: meta.n,
            params: &meta.params,
            columns: self.columns,
            data,
        };
        let mut s = serde_json::to_string(&doc)?;
        s.push('\n');
        Ok(s)
    }
}

/// Descriptive header carried by JSON tables.
#[derive(Debug, Clone)]
pub struct Metadata {
    pub model: String,
    pub n: usize,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub args: serde_json::Value,
    pub resolved: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Collects the files of one run and finishes with its manifest.
pub struct Writer {
    dir: PathBuf,
    format: Format,
    outputs: Vec<String>,
}

impl Writer {
    pub fn new(dir: impl Into<PathBuf>, format: Format) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            format,
            outputs: Vec::new(),
        })
    }

    pub fn table(&mut self, table: &Table, meta: &Metadata) -> Result<()> {
        let body = match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(meta)?,
        };
        self.raw(&table.file_name(self.format), &body)
    }

    pub fn raw(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        args: serde_json::Value,
        resolved: serde_json::Value,
        seed: Option<u64>,
    ) -> Result<PathBuf> {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            args,
            resolved,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: self.outputs,
        };
        let path = self.dir.join(Manifest::file_name(command));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        let _ = writeln!(text);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
