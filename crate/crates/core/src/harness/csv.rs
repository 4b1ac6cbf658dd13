use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::metrics::MetricRecord;
use crate::error::{Error, Result};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Comma-separated table preceded by a `#` comment block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub comments: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub(crate) fn real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x.fract() == 0.0 && x.abs() < 1e9 {
        format!("{x:.0}")
    } else {
        format!("{x:.9e}")
    }
}

/// Axis values keep their decimal form, e.g. `-2.5`.
pub(crate) fn point(x: f64) -> String {
    format!("{x}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.comments.push((key.into(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::shape(format!(
                "row has {} fields, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(bad) = row.iter().find(|f| f.contains(',') || f.contains('\n')) {
            return Err(Error::domain(format!("field `{bad}` needs quoting")));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Standard metric columns; all records must share one axis kind.
    pub fn from_records(records: &[MetricRecord]) -> Result<Self> {
        let kind = match records.first() {
            Some(r) => r.axis,
            None => return Err(Error::domain("no records")),
        };
        if records.iter().any(|r| r.axis != kind) {
            return Err(Error::domain("records mix axis kinds"));
        }
        let mut t = CsvTable::new(&[
            kind.column(),
            "sigma2",
            "scheme",
            "M",
            "m",
            "n",
            "rate_bits_per_use",
            "blocks_simulated",
            "block_errors",
            "bit_errors",
            "bler",
            "bler_ci95",
            "ber",
            "ber_ci95",
            "mse",
            "mse_ci95",
            "low_confidence",
            "M1",
            "outage",
        ]);
        for r in records {
            t.push(vec![
                point(r.snr_point),
                real(r.sigma2),
                r.scheme.clone(),
                r.size.to_string(),
                r.order.to_string(),
                r.channel_uses.to_string(),
                real(r.rate),
                r.blocks.to_string(),
                r.block_errors.to_string(),
                r.bit_errors.to_string(),
                real(r.bler),
                real(r.bler_ci95),
                real(r.ber),
                real(r.ber_ci95),
                r.mse.map(real).unwrap_or_default(),
                r.mse_ci95.map(real).unwrap_or_default(),
                r.low_confidence.to_string(),
                opt(r.m1),
                opt(r.outage),
            ])?;
        }
        Ok(t)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# version: {CODE_VERSION}");
        for (k, v) in &self.comments {
            let _ = writeln!(out, "# {k}: {}", v.replace('\n', " "));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub rows: usize,
}

/// Seeds, scale and outputs of one recipe or command run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub settings: BTreeMap<String, String>,
    pub files: Vec<ManifestFile>,
}

impl Manifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            version: CODE_VERSION.to_string(),
            settings: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.settings.insert(key.into(), value.to_string());
        self
    }

    pub fn render(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::domain(format!("manifest serialization: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.render()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_then_rows() {
        let mut t = CsvTable::new(&["snr_db", "bler"]);
        t.comment("seed", "3");
        t.push(vec![point(-2.5), real(0.125)]).unwrap();
        t.push(vec![point(10.0), real(0.0)]).unwrap();
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# version: dlcomm"));
        assert_eq!(lines[1], "# seed: 3");
        assert_eq!(lines[2], "snr_db,bler");
        assert_eq!(lines[3], "-2.5,1.250000000e-1");
        assert_eq!(lines[4], "10,0");
    }

    #[test]
    fn rejects_ragged_and_unquotable_rows() {
        let mut t = CsvTable::new(&["a", "b"]);
        assert!(t.push(vec!["1".into()]).is_err());
        assert!(t.push(vec!["1".into(), "x,y".into()]).is_err());
    }

    #[test]
    fn real_formatting_is_stable() {
        assert_eq!(real(3.0), "3");
        assert_eq!(real(f64::NAN), "nan");
        assert_eq!(real(1.0 / 3.0), "3.333333333e-1");
    }

    #[test]
    fn manifest_is_toml() {
        let mut m = Manifest::new("figure fig9");
        m.set("seed", 4);
        m.files.push(ManifestFile {
            name: "a.csv".into(),
            rows: 3,
        });
        let text = m.render().unwrap();
        let back: toml::Table = text.parse().unwrap();
        assert_eq!(back["command"].as_str(), Some("figure fig9"));
        assert_eq!(back["settings"]["seed"].as_str(), Some("4"));
    }
}
