//! Paired scalar observations and CSV ingestion.

use std::path::Path;

use crate::error::{Error, Result};

/// A finite sequence of paired scalar observations `(x_i, y_i)`.
///
/// `xs` is the cause-or-input axis, `ys` the effect-or-output axis. Both
/// columns have equal length `n >= 1` and every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidDataset(format!(
                "column lengths differ: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite entry".into()));
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Swaps the two columns.
    pub fn swapped(&self) -> Dataset {
        Dataset {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    /// Reads a two-column CSV with a one-line header (`x,y`), UTF-8,
    /// decimal point only.
    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())
            .map_err(|e| Error::Io(e.to_string()))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2; // header is line 1
            let record = record.map_err(|e| Error::Csv {
                line,
                msg: e.to_string(),
            })?;
            if record.len() != 2 {
                return Err(Error::Csv {
                    line,
                    msg: format!("expected 2 columns, found {}", record.len()),
                });
            }
            xs.push(parse_field(&record[0], line)?);
            ys.push(parse_field(&record[1], line)?);
        }
        Dataset::new(xs, ys)
    }
}

/// Reads a one-column CSV of samples with a one-line header. Used for files
/// carrying a single marginal (e.g. extra output observations).
pub fn read_samples_csv<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Csv {
            line,
            msg: e.to_string(),
        })?;
        if record.len() != 1 {
            return Err(Error::Csv {
                line,
                msg: format!("expected 1 column, found {}", record.len()),
            });
        }
        values.push(parse_field(&record[0], line)?);
    }
    if values.is_empty() {
        return Err(Error::InvalidDataset("no rows".into()));
    }
    Ok(values)
}

fn parse_field(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Csv {
        line,
        msg: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Csv {
            line,
            msg: format!("non-finite value: {field:?}"),
        });
    }
    Ok(v)
}
