//! File formats: field dumps, residual histories, sampled profiles and
//! weight bundles.
//!
//! Floats are written in Rust's shortest round-trip form, so every dump reads
//! back bit-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use fieldbridge_core::{FieldBuffer, WeightBundle};

use crate::error::{Error, Result};

/// Writes `field` as CSV with header `index,c0,c1,...`.
pub fn write_field_csv(path: &Path, field: &FieldBuffer) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["index".to_string()];
    header.extend((0..field.n_components()).map(|k| format!("c{k}")));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let mut record = Vec::with_capacity(header.len());
    for (index, row) in field.rows().enumerate() {
        record.clear();
        record.push(index.to_string());
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a field written by [`write_field_csv`]. Rows must be in index order.
pub fn read_field_csv(path: &Path) -> Result<FieldBuffer> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.get(0) != Some("index") || headers.len() < 2 {
        return Err(Error::Config(format!(
            "{}: expected header index,c0,..., got {:?}",
            path.display(),
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let c = headers.len() - 1;
    let mut data = Vec::new();
    for (expected, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let bad = |what: &str| Error::Config(format!("{}: row {expected}: {what}", path.display()));
        let index: usize = record[0]
            .parse()
            .map_err(|_| bad("index is not an integer"))?;
        if index != expected {
            return Err(bad("index out of order"));
        }
        for v in record.iter().skip(1) {
            data.push(v.parse::<f64>().map_err(|_| bad("value is not a float"))?);
        }
    }
    Ok(FieldBuffer::new(c, data)?)
}

/// Writes `iteration,residual` rows, iterations counted from 1.
pub fn write_residual_csv(path: &Path, history: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["iteration", "residual"])
        .map_err(|e| Error::csv(path, e))?;
    for (k, r) in history.iter().enumerate() {
        w.write_record([(k + 1).to_string(), r.to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_residual_csv(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for row in r.deserialize::<(usize, f64)>() {
        out.push(row.map_err(|e| Error::csv(path, e))?.1);
    }
    Ok(out)
}

/// Writes named numeric columns of equal length.
pub fn write_columns_csv(path: &Path, names: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    if names.len() != columns.len() || columns.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(Error::Config(format!(
            "{}: column names and lengths disagree",
            path.display()
        )));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(names).map_err(|e| Error::csv(path, e))?;
    let rows = columns.first().map_or(0, Vec::len);
    for k in 0..rows {
        w.write_record(columns.iter().map(|c| c[k].to_string()))
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_weight_bundle(path: &Path, bundle: &WeightBundle) -> Result<()> {
    bundle.validate()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, bundle).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_weight_bundle(path: &Path) -> Result<WeightBundle> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bundle: WeightBundle = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })?;
    bundle.validate()?;
    Ok(bundle)
}
