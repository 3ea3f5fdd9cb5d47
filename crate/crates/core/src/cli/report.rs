//! Report records and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// A reported number with its units and the tolerance it is known to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub units: &'static str,
    pub tolerance: f64,
}

impl Quantity {
    pub fn bits(value: f64, tolerance: f64) -> Self {
        Quantity { value, units: "bits", tolerance }
    }

    pub fn rate(value: f64, tolerance: f64) -> Self {
        Quantity { value, units: "bits/use", tolerance }
    }

    pub fn prob(value: f64, tolerance: f64) -> Self {
        Quantity { value, units: "probability", tolerance }
    }

    pub fn plain(value: f64, tolerance: f64) -> Self {
        Quantity { value, units: "dimensionless", tolerance }
    }
}

/// Output of one subcommand: a JSON report and a CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub quantities: BTreeMap<String, Quantity>,
    /// Non-numeric or structured fields.
    pub details: BTreeMap<String, Value>,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            quantities: BTreeMap::new(),
            details: BTreeMap::new(),
            csv_header: vec!["quantity".into(), "value".into(), "units".into(), "tolerance".into()],
            csv_rows: Vec::new(),
        }
    }

    /// Records a quantity in the JSON report and as a row of the default table.
    pub fn quantity(&mut self, name: &str, q: Quantity) -> &mut Self {
        self.csv_rows.push(vec![name.to_string(), fmt_f64(q.value), q.units.to_string(), fmt_f64(q.tolerance)]);
        self.quantities.insert(name.to_string(), q);
        self
    }

    pub fn detail(&mut self, name: &str, v: impl Serialize) -> &mut Self {
        self.details.insert(name.to_string(), serde_json::to_value(v).expect("serializable detail"));
        self
    }

    /// Replaces the default quantity table with a sweep table.
    pub fn table(&mut self, header: &[&str], rows: Vec<Vec<String>>) -> &mut Self {
        self.csv_header = header.iter().map(|s| s.to_string()).collect();
        self.csv_rows = rows;
        self
    }

    pub fn to_json(&self, seed: u64) -> Value {
        let mut root = serde_json::Map::new();
        root.insert("command".into(), Value::from(self.command));
        root.insert("seed".into(), Value::from(seed));
        root.insert("quantities".into(), serde_json::to_value(&self.quantities).expect("quantities"));
        for (k, v) in &self.details {
            root.insert(k.clone(), v.clone());
        }
        Value::Object(root)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        w.write_record(&self.csv_header).map_err(io)?;
        for row in &self.csv_rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `<command>.json` and `<command>.csv` into `dir`; returns both paths.
    pub fn write(&self, dir: &Path, seed: u64) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let json = dir.join(format!("{}.json", self.command));
        let csv = dir.join(format!("{}.csv", self.command));
        let mut text = serde_json::to_string_pretty(&self.to_json(seed)).expect("json");
        text.push('\n');
        write_atomic(&json, text.as_bytes())?;
        write_atomic(&csv, self.to_csv()?.as_bytes())?;
        Ok((json, csv))
    }
}

/// Shortest round-trip decimal form; non-finite values are spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| io_error(path, e))
}
