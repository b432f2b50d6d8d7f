//! Sample matrices and CSV ingestion.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An `N x D` matrix of finite samples, stored row-major, with unique
/// column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    n_rows: usize,
    n_cols: usize,
    values: Vec<T>,
    col_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from row-major values. Names default to `c0, c1, ...`.
    pub fn new(values: Vec<T>, n_cols: usize, col_names: Option<Vec<String>>) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one column".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one row".into()));
        }
        if values.len() % n_cols != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not fill rows of width {}",
                values.len(),
                n_cols
            )));
        }
        let n_rows = values.len() / n_cols;
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / n_cols,
                col: idx % n_cols,
            });
        }
        let col_names = match col_names {
            Some(names) => {
                validate_names(&names, n_cols)?;
                names
            }
            None => default_names(n_cols),
        };
        Ok(Self {
            n_rows,
            n_cols,
            values,
            col_names,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::InvalidArgument(format!("row {bad} has wrong width")));
        }
        Self::new(rows.concat(), n_cols, None)
    }

    pub fn from_columns(columns: &[Vec<T>], col_names: Option<Vec<String>>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_rows) {
            return Err(Error::InvalidArgument("columns differ in length".into()));
        }
        let n_cols = columns.len();
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for r in 0..n_rows {
            values.extend(columns.iter().map(|c| c[r]));
        }
        Self::new(values, n_cols, col_names)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.n_cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<T> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.col_names.iter().position(|n| n == name)
    }

    /// Applies `f(col, value)` to every entry, keeping names.
    pub fn map_values(&self, mut f: impl FnMut(usize, T) -> T) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| f(idx % self.n_cols, v))
            .collect();
        Self::new(values, self.n_cols, Some(self.col_names.clone()))
    }

    /// Keeps only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols) {
            return Err(Error::InvalidArgument(format!("column {c} out of range")));
        }
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        let names = cols.iter().map(|&c| self.col_names[c].clone()).collect();
        Self::new(values, cols.len(), Some(names))
    }

    /// Reorders rows: row `i` of the result is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for &r in order {
            values.extend_from_slice(self.row(r));
        }
        Self::new(values, self.n_cols, Some(self.col_names.clone()))
    }
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

fn validate_names(names: &[String], n_cols: usize) -> Result<()> {
    if names.len() != n_cols {
        return Err(Error::InvalidArgument(format!(
            "{} column names for {} columns",
            names.len(),
            n_cols
        )));
    }
    let mut seen = HashSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::Parse("empty column name in header".into()));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::Parse(format!("duplicate column name {name:?}")));
        }
    }
    Ok(())
}

/// Parses CSV text. Rows and columns in error messages are 0-based data
/// indices (the header row is not counted).
pub fn parse_dataset<T: Scalar>(text: &str, has_header: bool) -> Result<Dataset<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names = None;
    let mut n_cols = None;
    let mut values = Vec::new();
    let mut row = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if has_header && names.is_none() {
            names = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
            n_cols = Some(record.len());
            continue;
        }
        let width = *n_cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Parse(format!(
                "ragged row {row}: expected {width} fields, found {}",
                record.len()
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!("non-numeric value {cell:?} at row {row} col {col}"))
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
            values.push(T::of(v));
        }
        row += 1;
    }
    if values.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    Dataset::new(values, n_cols.unwrap_or(0), names)
}

/// Guesses whether the first non-empty record is a header: it is one when
/// any field fails to parse as a number.
pub fn sniff_header(text: &str) -> bool {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .records()
        .filter_map(|r| r.ok())
        .find(|r| !(r.len() == 1 && r[0].is_empty()))
        .is_some_and(|r| r.iter().any(|cell| cell.parse::<f64>().is_err()))
}

/// Reads a rectangular numeric CSV file.
pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset<T>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_dataset(&text, has_header)
}

/// Writes a dataset with a header row. Values use the shortest
/// representation that parses back to the same float.
pub fn save_dataset<T: Scalar>(dataset: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_dataset(dataset, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_dataset<T: Scalar>(dataset: &Dataset<T>, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{}", dataset.col_names().join(","))?;
    for r in 0..dataset.n_rows() {
        let line = dataset
            .row(r)
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "{line}")?;
    }
    Ok(())
}
