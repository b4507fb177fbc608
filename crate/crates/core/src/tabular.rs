//! Columnar table of named `f64` columns plus named string columns.
//!
//! A [`FeatureTable`] never changes after construction; every operation
//! returns a new table. Column order is stable and appends go to the end.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericColumn {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringColumn {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    /// Population (divide-by-n) standard deviation over finite entries.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub n_nonfinite: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    columns: Vec<NumericColumn>,
    string_columns: Vec<StringColumn>,
    n_rows: usize,
}

impl FeatureTable {
    /// Builds a table, checking lengths and name uniqueness.
    pub fn new(
        columns: Vec<NumericColumn>,
        string_columns: Vec<StringColumn>,
    ) -> Result<Self, TableError> {
        let n_rows = columns
            .first()
            .map(|c| c.values.len())
            .or_else(|| string_columns.first().map(|c| c.values.len()))
            .unwrap_or(0);
        let mut seen = HashSet::new();
        for (name, len) in columns
            .iter()
            .map(|c| (&c.name, c.values.len()))
            .chain(string_columns.iter().map(|c| (&c.name, c.values.len())))
        {
            if !seen.insert(name.as_str()) {
                return Err(TableError::DuplicateColumn(name.clone()));
            }
            if len != n_rows {
                return Err(TableError::LengthMismatch { expected: n_rows, actual: len });
            }
        }
        Ok(Self { columns, string_columns, n_rows })
    }

    /// Table with only numeric columns given as `(name, values)` pairs.
    pub fn from_numeric<S: Into<String>>(cols: Vec<(S, Vec<f64>)>) -> Result<Self, TableError> {
        Self::new(
            cols.into_iter()
                .map(|(name, values)| NumericColumn { name: name.into(), values })
                .collect(),
            Vec::new(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[NumericColumn] {
        &self.columns
    }

    pub fn string_columns(&self) -> &[StringColumn] {
        &self.string_columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.column(name).is_some() || self.string_column(name).is_some()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn string_column(&self, name: &str) -> Option<&[String]> {
        self.string_columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Value at `(row, col)` of the numeric block.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col].values[row]
    }

    /// One numeric row in column order.
    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[row]).collect()
    }

    /// Keeps exactly the named columns (numeric or string) in the given order.
    /// Numeric columns come first in the result, string columns after,
    /// each group in the order they appear in `names`.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, TableError> {
        let mut columns = Vec::new();
        let mut string_columns = Vec::new();
        for name in names {
            let name = name.as_ref();
            if let Some(c) = self.columns.iter().find(|c| c.name == name) {
                columns.push(c.clone());
            } else if let Some(c) = self.string_columns.iter().find(|c| c.name == name) {
                string_columns.push(c.clone());
            } else {
                return Err(TableError::UnknownColumn(name.to_string()));
            }
        }
        let mut out = Self::new(columns, string_columns)?;
        out.n_rows = self.n_rows;
        Ok(out)
    }

    /// Removes the named columns, numeric or string.
    pub fn drop_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, TableError> {
        for name in names {
            if !self.has_column(name.as_ref()) {
                return Err(TableError::UnknownColumn(name.as_ref().to_string()));
            }
        }
        let dropped = |n: &str| names.iter().any(|d| d.as_ref() == n);
        Ok(Self {
            columns: self.columns.iter().filter(|c| !dropped(&c.name)).cloned().collect(),
            string_columns: self
                .string_columns
                .iter()
                .filter(|c| !dropped(&c.name))
                .cloned()
                .collect(),
            n_rows: self.n_rows,
        })
    }

    /// Only the numeric block.
    pub fn numeric_only(&self) -> Self {
        Self { columns: self.columns.clone(), string_columns: Vec::new(), n_rows: self.n_rows }
    }

    pub fn filter_rows(&self, mask: &[bool]) -> Result<Self, TableError> {
        if mask.len() != self.n_rows {
            return Err(TableError::LengthMismatch { expected: self.n_rows, actual: mask.len() });
        }
        let keep: Vec<usize> = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        Ok(self.take_rows(&keep))
    }

    /// Rows at `indices`, in the order given. Indices may repeat.
    pub fn take_rows(&self, indices: &[usize]) -> Self {
        Self {
            columns: self
                .columns
                .iter()
                .map(|c| NumericColumn {
                    name: c.name.clone(),
                    values: indices.iter().map(|&i| c.values[i]).collect(),
                })
                .collect(),
            string_columns: self
                .string_columns
                .iter()
                .map(|c| StringColumn {
                    name: c.name.clone(),
                    values: indices.iter().map(|&i| c.values[i].clone()).collect(),
                })
                .collect(),
            n_rows: indices.len(),
        }
    }

    /// Appends a numeric column at the end.
    pub fn with_column(&self, name: &str, values: Vec<f64>) -> Result<Self, TableError> {
        self.check_new_column(name, values.len())?;
        let mut out = self.clone();
        out.n_rows = values.len();
        out.columns.push(NumericColumn { name: name.to_string(), values });
        Ok(out)
    }

    /// Appends a string column at the end.
    pub fn with_string_column(&self, name: &str, values: Vec<String>) -> Result<Self, TableError> {
        self.check_new_column(name, values.len())?;
        let mut out = self.clone();
        out.n_rows = values.len();
        out.string_columns.push(StringColumn { name: name.to_string(), values });
        Ok(out)
    }

    /// Replaces the values of an existing numeric column in place of order.
    pub fn replace_column(&self, name: &str, values: Vec<f64>) -> Result<Self, TableError> {
        if values.len() != self.n_rows {
            return Err(TableError::LengthMismatch { expected: self.n_rows, actual: values.len() });
        }
        let mut out = self.clone();
        let col = out
            .columns
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| TableError::UnknownColumn(name.to_string()))?;
        col.values = values;
        Ok(out)
    }

    /// Rebuilds every numeric column through `f(index, column)`; lengths must not change.
    pub fn map_columns<F>(&self, f: F) -> Self
    where
        F: Fn(usize, &NumericColumn) -> Vec<f64>,
    {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let values = f(i, c);
                assert_eq!(values.len(), self.n_rows, "map_columns changed column length");
                NumericColumn { name: c.name.clone(), values }
            })
            .collect();
        Self { columns, string_columns: self.string_columns.clone(), n_rows: self.n_rows }
    }

    fn check_new_column(&self, name: &str, len: usize) -> Result<(), TableError> {
        if self.has_column(name) {
            return Err(TableError::DuplicateColumn(name.to_string()));
        }
        // An empty table with no columns adopts the first column's length.
        if (self.columns.is_empty() && self.string_columns.is_empty()) || len == self.n_rows {
            Ok(())
        } else {
            Err(TableError::LengthMismatch { expected: self.n_rows, actual: len })
        }
    }

    /// Concatenates rows of tables with identical schemas. Callers check schemas.
    pub(crate) fn concat_unchecked(tables: &[FeatureTable]) -> Self {
        let Some(first) = tables.first() else {
            return Self::default();
        };
        let mut out = first.clone();
        for t in &tables[1..] {
            for (dst, src) in out.columns.iter_mut().zip(&t.columns) {
                dst.values.extend_from_slice(&src.values);
            }
            for (dst, src) in out.string_columns.iter_mut().zip(&t.string_columns) {
                dst.values.extend(src.values.iter().cloned());
            }
            out.n_rows += t.n_rows;
        }
        out
    }

    pub fn column_stats(&self, name: &str) -> Result<ColumnStats, TableError> {
        let values = self.column(name).ok_or_else(|| TableError::UnknownColumn(name.to_string()))?;
        Ok(stats_of(name, values))
    }
}

pub(crate) fn stats_of(name: &str, values: &[f64]) -> ColumnStats {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = finite.len();
    let (mean, std_dev, min, max) = if n == 0 {
        (f64::NAN, 0.0, f64::NAN, f64::NAN)
    } else {
        let mean = finite.iter().sum::<f64>() / n as f64;
        let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (mean, var.sqrt(), min, max)
    };
    ColumnStats { name: name.to_string(), mean, std_dev, min, max, n_nonfinite: values.len() - n }
}
