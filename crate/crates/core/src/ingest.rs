//! CSV ingestion: one file per attack type, head-capped, merged in order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema;
use crate::tabular::{FeatureTable, NumericColumn, StringColumn, TableError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}: missing header row")]
    MissingHeader(PathBuf),
    #[error("missing label column `{0}`")]
    MissingLabelColumn(String),
    #[error("schema mismatch between table 0 and table {table}: differing columns {columns:?}")]
    SchemaMismatch { table: usize, columns: Vec<String> },
    #[error("{path}: no rows labeled `{label}`")]
    LabelNotFound { path: PathBuf, label: String },
    #[error("ingest spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: PathBuf,
    /// When set, the file must contain at least one row with this label.
    #[serde(default)]
    pub expected_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub files: Vec<SourceFile>,
    pub per_file_cap: usize,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    /// Columns kept as text. Defaults to the CIC identity columns.
    #[serde(default = "default_text_columns")]
    pub text_columns: Vec<String>,
}

fn default_label_column() -> String {
    schema::LABEL_COLUMN.to_string()
}

fn default_text_columns() -> Vec<String> {
    schema::TEXT_COLUMNS.iter().map(|s| s.to_string()).collect()
}

impl IngestSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.files.is_empty() {
            return Err(IngestError::InvalidSpec("file list is empty".into()));
        }
        if self.per_file_cap == 0 {
            return Err(IngestError::InvalidSpec("per_file_cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parses one numeric field. Unparseable and empty fields become NaN;
/// `inf`/`Infinity`/`NaN` in any case are accepted by the std parser.
pub fn parse_field(raw: &str) -> f64 {
    let s = raw.trim();
    if s.is_empty() {
        return f64::NAN;
    }
    s.parse::<f64>().unwrap_or(f64::NAN)
}

/// Loads at most `cap` data rows from the head of `path`, using the default
/// CIC text-column set.
pub fn load_csv(path: &Path, cap: usize, label_column: &str) -> Result<FeatureTable, IngestError> {
    load_csv_with(path, cap, label_column, &default_text_columns())
}

pub fn load_csv_with(
    path: &Path,
    cap: usize,
    label_column: &str,
    text_columns: &[String],
) -> Result<FeatureTable, IngestError> {
    let csv_err = |source| IngestError::Csv { path: path.to_path_buf(), source };
    let file = std::fs::File::open(path)
        .map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(std::io::BufReader::new(file));
    let header: Vec<String> =
        reader.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(IngestError::MissingHeader(path.to_path_buf()));
    }
    if !header.iter().any(|h| h == label_column) {
        return Err(IngestError::MissingLabelColumn(label_column.to_string()));
    }
    let is_text: Vec<bool> = header
        .iter()
        .map(|h| h == label_column || text_columns.iter().any(|t| t == h))
        .collect();

    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    let mut text: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut record = csv::StringRecord::new();
    let mut n = 0usize;
    while n < cap && reader.read_record(&mut record).map_err(csv_err)? {
        for (j, field) in record.iter().enumerate() {
            if is_text[j] {
                text[j].push(field.trim().to_string());
            } else {
                numeric[j].push(parse_field(field));
            }
        }
        n += 1;
    }

    let mut columns = Vec::new();
    let mut string_columns = Vec::new();
    for (j, name) in header.into_iter().enumerate() {
        if is_text[j] {
            string_columns.push(StringColumn { name, values: std::mem::take(&mut text[j]) });
        } else {
            columns.push(NumericColumn { name, values: std::mem::take(&mut numeric[j]) });
        }
    }
    Ok(FeatureTable::new(columns, string_columns)?)
}

/// Loads every file of the spec (in parallel) and merges them in listed order.
pub fn load_all(spec: &IngestSpec) -> Result<FeatureTable, IngestError> {
    spec.validate()?;
    let tables: Vec<FeatureTable> = spec
        .files
        .par_iter()
        .map(|f| {
            let t = load_csv_with(&f.path, spec.per_file_cap, &spec.label_column, &spec.text_columns)?;
            if let Some(label) = &f.expected_label {
                let labels = t
                    .string_column(&spec.label_column)
                    .ok_or_else(|| IngestError::MissingLabelColumn(spec.label_column.clone()))?;
                if !labels.iter().any(|l| l == label) {
                    return Err(IngestError::LabelNotFound { path: f.path.clone(), label: label.clone() });
                }
            }
            Ok(t)
        })
        .collect::<Result<_, _>>()?;
    merge(&tables)
}

fn schema_of(t: &FeatureTable) -> (Vec<&str>, Vec<&str>) {
    (
        t.columns().iter().map(|c| c.name.as_str()).collect(),
        t.string_columns().iter().map(|c| c.name.as_str()).collect(),
    )
}

/// Concatenates rows in input order. All tables must share one schema.
pub fn merge(tables: &[FeatureTable]) -> Result<FeatureTable, IngestError> {
    let Some(first) = tables.first() else {
        return Ok(FeatureTable::default());
    };
    let reference = schema_of(first);
    for (i, t) in tables.iter().enumerate().skip(1) {
        let other = schema_of(t);
        if other != reference {
            let mut columns: Vec<String> = Vec::new();
            let a = reference.0.iter().chain(&reference.1);
            let b = other.0.iter().chain(&other.1);
            let a: Vec<&str> = a.copied().collect();
            let b: Vec<&str> = b.copied().collect();
            for (k, name) in a.iter().enumerate() {
                if b.get(k) != Some(name) {
                    columns.push(name.to_string());
                }
            }
            for (k, name) in b.iter().enumerate() {
                if a.get(k) != Some(name) && !columns.iter().any(|c| c == name) {
                    columns.push(name.to_string());
                }
            }
            return Err(IngestError::SchemaMismatch { table: i, columns });
        }
    }
    Ok(FeatureTable::concat_unchecked(tables))
}

/// Exact label multiset, iterated in sorted label order.
pub fn label_counts(
    table: &FeatureTable,
    label_column: &str,
) -> Result<BTreeMap<String, usize>, IngestError> {
    let labels = table
        .string_column(label_column)
        .ok_or_else(|| IngestError::MissingLabelColumn(label_column.to_string()))?;
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.clone()).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Formats a value so that parsing it back yields the same bits.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v == f64::INFINITY {
        "Infinity".to_string()
    } else if v == f64::NEG_INFINITY {
        "-Infinity".to_string()
    } else {
        // Display for f64 is the shortest round-trip representation.
        format!("{v}")
    }
}

/// Writes the table as CSV. `order` fixes the column order; when `None`,
/// numeric columns come first, then string columns.
pub fn write_csv(table: &FeatureTable, path: &Path, order: Option<&[&str]>) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io { path: path.to_path_buf(), source };
    let csv_err = |source| IngestError::Csv { path: path.to_path_buf(), source };
    let default_order: Vec<String> = table
        .columns()
        .iter()
        .map(|c| c.name.clone())
        .chain(table.string_columns().iter().map(|c| c.name.clone()))
        .collect();
    let names: Vec<&str> = match order {
        Some(o) => o.to_vec(),
        None => default_order.iter().map(String::as_str).collect(),
    };
    enum Src<'a> {
        Num(&'a [f64]),
        Text(&'a [String]),
    }
    let sources: Vec<Src> = names
        .iter()
        .map(|n| {
            table
                .column(n)
                .map(Src::Num)
                .or_else(|| table.string_column(n).map(Src::Text))
                .ok_or_else(|| IngestError::Table(TableError::UnknownColumn(n.to_string())))
        })
        .collect::<Result<_, _>>()?;

    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = csv::WriterBuilder::new().from_writer(std::io::BufWriter::new(file));
    w.write_record(&names).map_err(csv_err)?;
    let mut row: Vec<String> = Vec::with_capacity(names.len());
    for i in 0..table.n_rows() {
        row.clear();
        for s in &sources {
            row.push(match s {
                Src::Num(v) => format_value(v[i]),
                Src::Text(v) => v[i].clone(),
            });
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn head_cap_and_trimmed_headers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.csv",
            "Unnamed: 0, Flow Duration, Flow Packets/s, Label\n0,1,2,A\n1,3,Infinity,A\n2,5,,B\n",
        );
        let t = load_csv(&p, 2, "Label").unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.column_names(), vec!["Unnamed: 0", "Flow Duration", "Flow Packets/s"]);
        assert_eq!(t.column("Flow Packets/s").unwrap()[1], f64::INFINITY);
        let full = load_csv(&p, usize::MAX, "Label").unwrap();
        assert!(full.column("Flow Packets/s").unwrap()[2].is_nan());
        assert_eq!(full.string_column("Label").unwrap(), &["A", "A", "B"]);
        assert_eq!(full.take_rows(&[0, 1]), t);
    }

    #[test]
    fn nonnumeric_tokens() {
        for (tok, check) in [
            ("inf", f64::INFINITY),
            ("-Infinity", f64::NEG_INFINITY),
            ("INF", f64::INFINITY),
            ("1e3", 1000.0),
        ] {
            assert_eq!(parse_field(tok), check, "{tok}");
        }
        assert!(parse_field("NaN").is_nan());
        assert!(parse_field("").is_nan());
        assert!(parse_field("abc").is_nan());
    }

    #[test]
    fn missing_label_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y\n1,2\n");
        assert!(matches!(load_csv(&p, 10, "Label"), Err(IngestError::MissingLabelColumn(_))));
        let e = write(dir.path(), "e.csv", "");
        assert!(matches!(load_csv(&e, 10, "Label"), Err(IngestError::MissingHeader(_))));
        assert!(matches!(
            load_csv(&dir.path().join("none.csv"), 10, "Label"),
            Err(IngestError::Io { .. })
        ));
    }

    #[test]
    fn merge_orders_and_checks_schema() {
        let a = FeatureTable::from_numeric(vec![("x", vec![1.0, 2.0])]).unwrap();
        let b = FeatureTable::from_numeric(vec![("x", vec![3.0, 4.0])]).unwrap();
        assert_eq!(merge(std::slice::from_ref(&a)).unwrap(), a);
        let m = merge(&[a.clone(), b]).unwrap();
        assert_eq!(m.column("x").unwrap(), &[1.0, 2.0, 3.0, 4.0]);
        let c = FeatureTable::from_numeric(vec![("y", vec![0.0])]).unwrap();
        match merge(&[a, c]) {
            Err(IngestError::SchemaMismatch { table, columns }) => {
                assert_eq!(table, 1);
                assert_eq!(columns, vec!["x", "y"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_counts_partition() {
        let t = FeatureTable::default().with_string_column("Label", vec![]).unwrap();
        assert!(label_counts(&t, "Label").unwrap().is_empty());
        let t = FeatureTable::default()
            .with_string_column("Label", ["b", "a", "b"].map(String::from).to_vec())
            .unwrap();
        let c = label_counts(&t, "Label").unwrap();
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![(&"a".to_string(), &1), (&"b".to_string(), &2)]);
        assert_eq!(c.values().sum::<usize>(), t.n_rows());
        assert!(label_counts(&t, "Other").is_err());
    }

    #[test]
    fn expected_label_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,Label\n1,A\n");
        let spec = IngestSpec {
            files: vec![SourceFile { path: p, expected_label: Some("Syn".into()) }],
            per_file_cap: 10,
            label_column: "Label".into(),
            text_columns: vec![],
        };
        assert!(matches!(load_all(&spec), Err(IngestError::LabelNotFound { .. })));
    }

    proptest::proptest! {
        #[test]
        fn csv_round_trip_is_bitwise(values in proptest::collection::vec(proptest::num::f64::ANY, 1..40)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("t.csv");
            let n = values.len();
            let t = FeatureTable::from_numeric(vec![("v", values.clone())]).unwrap()
                .with_string_column("Label", vec!["A".to_string(); n]).unwrap();
            write_csv(&t, &p, None).unwrap();
            let back = load_csv(&p, usize::MAX, "Label").unwrap();
            let got = back.column("v").unwrap();
            for (a, b) in values.iter().zip(got) {
                if a.is_nan() {
                    proptest::prop_assert!(b.is_nan());
                } else {
                    proptest::prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }
}
