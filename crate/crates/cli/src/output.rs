//! Artifact files. Floats are written with 17 significant digits so that
//! they read back bit for bit.

use std::fs;
use std::io;
use std::path::Path;

use serde_json::{Map, Value};

use crate::run::{Outcome, Signal};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_json(path: &Path, v: &Value) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(v).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// `timeseries.csv` and `metrics.json`.
pub fn write_outcome(dir: &Path, o: &Outcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("timeseries.csv")).map_err(csv_err)?;
    let mut header = vec!["t_ps".to_string()];
    for s in &o.signals {
        match s {
            Signal::Complex(name, _) => header.extend([format!("{name}_re"), format!("{name}_im")]),
            Signal::Real(name, _) => header.push(name.clone()),
        }
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..o.grid.len() {
        let mut row = vec![num(o.grid.time(i))];
        for s in &o.signals {
            match s {
                Signal::Complex(_, v) => row.extend([num(v[i].re), num(v[i].im)]),
                Signal::Real(_, v) => row.push(num(v[i])),
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    write_json(&dir.join("metrics.json"), &Value::Object(o.metrics.clone()))
}

fn cell(v: Option<&Value>) -> String {
    match v {
        Some(Value::Number(n)) if n.is_f64() => n.as_f64().map(num).unwrap_or_default(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(Value::String(s)) => s.clone(),
        _ => String::new(),
    }
}

/// `sweep.csv`: the swept value, then every scalar metric.
pub fn write_sweep(dir: &Path, key: &str, rows: &[(Value, Map<String, Value>)]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut cols: Vec<&String> = rows
        .iter()
        .flat_map(|(_, m)| m.iter().filter(|(_, v)| v.is_number() || v.is_boolean()).map(|(k, _)| k))
        .collect();
    cols.sort();
    cols.dedup();
    let mut w = csv::Writer::from_path(dir.join("sweep.csv")).map_err(csv_err)?;
    let mut header = vec![key.to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (v, m) in rows {
        let mut row = vec![cell(Some(v))];
        row.extend(cols.iter().map(|c| cell(m.get(*c))));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}
