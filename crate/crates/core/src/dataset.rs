//! Tabular data loading and preparation.
//!
//! A [`Dataset`] is an immutable table of named feature columns plus integer
//! class labels. Cells equal to `?` or the empty string are treated as
//! missing (the usual convention in public benchmark repositories). Feature
//! kinds are either declared up front (schema file or programmatic hints) or
//! inferred from the number of distinct values a column takes: fewer than
//! `epsilon` distinct values (default `sqrt(n)`) means discrete, anything
//! else continuous.
//!
//! The analysis pipeline consumes per-kind *views* built by
//! [`split_by_kind`]: the continuous view carries raw `f64` columns, the
//! discrete view carries integer codes remapped to a contiguous `0..v-1`
//! range in first-appearance order. String-valued columns are coded the same
//! way at load time, which also pins their kind to discrete.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Whether a feature is treated as real-valued or categorical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Discrete,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Continuous => write!(f, "continuous"),
            FeatureKind::Discrete => write!(f, "discrete"),
        }
    }
}

/// One feature column: raw numeric values plus a per-sample missing mask.
///
/// String categories are replaced by integer codes (first-appearance order)
/// while loading, so `values` is always numeric. Missing slots hold NaN and
/// are flagged in `missing`.
#[derive(Debug, Clone)]
pub struct FeatureColumn {
    pub name: String,
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
    pub kind: FeatureKind,
    /// True when the kind came from a schema/hint or from string content;
    /// declared kinds are never overridden by inference.
    pub declared: bool,
}

impl FeatureColumn {
    /// Count of distinct non-missing values (used for kind inference).
    pub fn distinct_count(&self) -> usize {
        let mut seen: Vec<f64> = self
            .values
            .iter()
            .zip(&self.missing)
            .filter(|(_, &miss)| !miss)
            .map(|(&v, _)| v + 0.0) // normalize -0.0 to 0.0
            .collect();
        seen.sort_by(f64::total_cmp);
        seen.dedup_by(|a, b| a == b);
        seen.len()
    }

    /// True when every observed value is identical (or none are observed).
    pub fn is_constant(&self) -> bool {
        self.distinct_count() <= 1
    }

    fn observed(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.missing)
            .filter(|(_, &miss)| !miss)
            .map(|(&v, _)| v)
    }
}

/// A loaded table: feature columns plus integer class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<FeatureColumn>,
    pub labels: Vec<u32>,
    pub label_name: String,
}

impl Dataset {
    /// Sample count.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Feature count (label excluded).
    pub fn m(&self) -> usize {
        self.columns.len()
    }

    /// Number of distinct classes.
    pub fn class_count(&self) -> usize {
        let mut ids: Vec<u32> = self.labels.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// True when no cell is missing.
    pub fn fully_observed(&self) -> bool {
        self.columns.iter().all(|c| c.missing.iter().all(|&m| !m))
    }

    fn check_invariants(&self) -> Result<()> {
        if self.n() < 2 || self.m() < 1 {
            return Err(Error::TooSmall {
                rows: self.n(),
                cols: self.m(),
            });
        }
        for col in &self.columns {
            if col.values.len() != self.n() || col.missing.len() != self.n() {
                return Err(Error::LengthMismatch(col.values.len(), self.n()));
            }
        }
        if self.class_count() < 2 {
            return Err(Error::DegenerateLabels);
        }
        Ok(())
    }

    /// Apply inferred kinds to columns whose kind was not declared.
    pub fn set_kinds(&mut self, kinds: &[FeatureKind]) {
        assert_eq!(kinds.len(), self.m(), "one kind per feature");
        for (col, &kind) in self.columns.iter_mut().zip(kinds) {
            if !col.declared {
                col.kind = kind;
            }
        }
    }

    /// Write the table back out as CSV (used by the dataset generator and
    /// round-trip tests). Missing cells become `?`; labels go in the last
    /// column as `c<id>`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(Error::Csv)?;
        let mut header: Vec<String> = self.columns.iter().map(|c| c.name.clone()).collect();
        header.push(self.label_name.clone());
        w.write_record(&header)?;
        for row in 0..self.n() {
            let mut rec: Vec<String> = Vec::with_capacity(self.m() + 1);
            for col in &self.columns {
                if col.missing[row] {
                    rec.push("?".to_string());
                } else {
                    let v = col.values[row];
                    if v == v.trunc() && v.abs() < 1e15 {
                        rec.push(format!("{}", v as i64));
                    } else {
                        rec.push(format!("{v}"));
                    }
                }
            }
            rec.push(format!("c{}", self.labels[row]));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(())
    }

    /// Write a sidecar schema (`column=continuous|discrete|label` lines).
    pub fn write_schema(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for col in &self.columns {
            out.push_str(&format!("{}={}\n", col.name, col.kind));
        }
        out.push_str(&format!("{}=label\n", self.label_name));
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// How to resolve missing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputePolicy {
    /// Replace missing discrete cells with the column mode and missing
    /// continuous cells with the column median.
    MedianMode,
    /// Remove every sample that has any missing cell.
    Drop,
}

impl fmt::Display for ImputePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImputePolicy::MedianMode => write!(f, "median-mode"),
            ImputePolicy::Drop => write!(f, "drop"),
        }
    }
}

/// Kind hints parsed from a sidecar schema file.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub kinds: Vec<(String, FeatureKind)>,
    pub label: Option<String>,
}

/// Parse a sidecar schema file: one `column=continuous|discrete|label` pair
/// per line, `#` comments and blank lines ignored.
pub fn parse_schema(path: &Path) -> Result<Schema> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut schema = Schema::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((name, kind)) = line.split_once('=') else {
            return Err(Error::MalformedSchema {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let name = name.trim().to_string();
        match kind.trim() {
            "continuous" => schema.kinds.push((name, FeatureKind::Continuous)),
            "discrete" => schema.kinds.push((name, FeatureKind::Discrete)),
            "label" => schema.label = Some(name),
            _ => {
                return Err(Error::MalformedSchema {
                    line: i + 1,
                    text: raw.to_string(),
                })
            }
        }
    }
    Ok(schema)
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

/// Load a CSV file with a header row into a [`Dataset`].
///
/// `label_column` is a header name, or a 0-based column index when no header
/// matches the text and it parses as an integer. `declared_kinds` pins the
/// kind of the named columns; all other columns get a provisional kind from
/// distinct-value inference with the default threshold `sqrt(n)` (rerun
/// [`infer_feature_kinds`] for a custom threshold).
///
/// Rows whose label cell is missing are dropped: a sample without a class is
/// unusable for supervised selection and the label store has no missing
/// representation.
pub fn load_csv(
    path: &Path,
    label_column: &str,
    declared_kinds: &HashMap<String, FeatureKind>,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                let source = match e.into_kind() {
                    csv::ErrorKind::Io(io) => io,
                    _ => unreachable!(),
                };
                Error::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
            _ => Error::Csv(e),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(Error::Csv)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .or_else(|| {
            label_column
                .parse::<usize>()
                .ok()
                .filter(|&i| i < headers.len())
        })
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(Error::Csv)?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: i + 2, // 1-based, counting the header line
                got: record.len(),
                expected: headers.len(),
            });
        }
        rows.push(record.iter().map(|c| c.to_string()).collect());
    }

    // Drop rows without a usable label before anything else.
    rows.retain(|r| !is_missing(&r[label_idx]));
    let n = rows.len();

    // Code labels by first appearance.
    let mut label_codes: HashMap<String, u32> = HashMap::new();
    let mut labels: Vec<u32> = Vec::with_capacity(n);
    for row in &rows {
        let cell = row[label_idx].clone();
        let next = label_codes.len() as u32;
        labels.push(*label_codes.entry(cell).or_insert(next));
    }

    for declared in declared_kinds.keys() {
        if !headers.iter().any(|h| h == declared) {
            return Err(Error::UnknownSchemaColumn(declared.clone()));
        }
    }

    let mut columns: Vec<FeatureColumn> = Vec::new();
    for (ci, name) in headers.iter().enumerate() {
        if ci == label_idx {
            continue;
        }
        let cells: Vec<&str> = rows.iter().map(|r| r[ci].as_str()).collect();
        let missing: Vec<bool> = cells.iter().map(|c| is_missing(c)).collect();
        let numeric = cells
            .iter()
            .zip(&missing)
            .all(|(c, &miss)| miss || c.parse::<f64>().is_ok());

        let hint = declared_kinds.get(name).copied();
        let (values, kind, declared) = if numeric {
            let values: Vec<f64> = cells
                .iter()
                .zip(&missing)
                .map(|(c, &miss)| {
                    if miss {
                        f64::NAN
                    } else {
                        c.parse::<f64>().unwrap()
                    }
                })
                .collect();
            match hint {
                Some(kind) => (values, kind, true),
                None => (values, FeatureKind::Continuous, false), // provisional, fixed below
            }
        } else {
            // String categories force a discrete column, coded by first appearance.
            if hint == Some(FeatureKind::Continuous) {
                return Err(Error::NonNumericContinuous(name.clone()));
            }
            let mut codes: HashMap<&str, f64> = HashMap::new();
            let values: Vec<f64> = cells
                .iter()
                .zip(&missing)
                .map(|(c, &miss)| {
                    if miss {
                        f64::NAN
                    } else {
                        let next = codes.len() as f64;
                        *codes.entry(*c).or_insert(next)
                    }
                })
                .collect();
            (values, FeatureKind::Discrete, true)
        };

        columns.push(FeatureColumn {
            name: name.clone(),
            values,
            missing,
            kind,
            declared,
        });
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());

    let mut dataset = Dataset {
        name,
        columns,
        labels,
        label_name: headers[label_idx].clone(),
    };
    let kinds = infer_feature_kinds(&dataset, None);
    dataset.set_kinds(&kinds);
    dataset.check_invariants()?;
    Ok(dataset)
}

/// Infer a kind for every feature: fewer than `epsilon` distinct observed
/// values (default `sqrt(n)`, strict comparison) means discrete. Declared
/// kinds are passed through untouched.
pub fn infer_feature_kinds(d: &Dataset, epsilon: Option<f64>) -> Vec<FeatureKind> {
    let eps = epsilon.unwrap_or_else(|| (d.n() as f64).sqrt());
    d.columns
        .iter()
        .map(|col| {
            if col.declared {
                col.kind
            } else if (col.distinct_count() as f64) < eps {
                FeatureKind::Discrete
            } else {
                FeatureKind::Continuous
            }
        })
        .collect()
}

/// Resolve missing cells according to `policy`.
///
/// `Drop` fails when fewer than 10 samples or fewer than 2 classes survive;
/// `MedianMode` fails only for a column with no observed values at all.
pub fn impute_missing(d: &Dataset, policy: ImputePolicy) -> Result<Dataset> {
    match policy {
        ImputePolicy::Drop => {
            let keep: Vec<usize> = (0..d.n())
                .filter(|&row| d.columns.iter().all(|c| !c.missing[row]))
                .collect();
            if keep.len() < 10 {
                return Err(Error::TooSmall {
                    rows: keep.len(),
                    cols: d.m(),
                });
            }
            let columns = d
                .columns
                .iter()
                .map(|c| FeatureColumn {
                    name: c.name.clone(),
                    values: keep.iter().map(|&r| c.values[r]).collect(),
                    missing: vec![false; keep.len()],
                    kind: c.kind,
                    declared: c.declared,
                })
                .collect();
            let out = Dataset {
                name: d.name.clone(),
                columns,
                labels: keep.iter().map(|&r| d.labels[r]).collect(),
                label_name: d.label_name.clone(),
            };
            out.check_invariants()?;
            Ok(out)
        }
        ImputePolicy::MedianMode => {
            let mut columns = Vec::with_capacity(d.m());
            for c in &d.columns {
                let fill = if c.missing.iter().any(|&m| m) {
                    let observed: Vec<f64> = c.observed().collect();
                    if observed.is_empty() {
                        return Err(Error::InvalidOption(format!(
                            "column {:?} has no observed values to impute from",
                            c.name
                        )));
                    }
                    Some(match c.kind {
                        FeatureKind::Continuous => median(&observed),
                        FeatureKind::Discrete => mode(&observed),
                    })
                } else {
                    None
                };
                let values = match fill {
                    Some(fill) => c
                        .values
                        .iter()
                        .zip(&c.missing)
                        .map(|(&v, &miss)| if miss { fill } else { v })
                        .collect(),
                    None => c.values.clone(),
                };
                columns.push(FeatureColumn {
                    name: c.name.clone(),
                    values,
                    missing: vec![false; d.n()],
                    kind: c.kind,
                    declared: c.declared,
                });
            }
            Ok(Dataset {
                name: d.name.clone(),
                columns,
                labels: d.labels.clone(),
                label_name: d.label_name.clone(),
            })
        }
    }
}

fn median(sorted_or_not: &[f64]) -> f64 {
    let mut v = sorted_or_not.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Most frequent value; frequency ties break toward the smallest value.
fn mode(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut best = v[0];
    let mut best_count = 0usize;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if j - i > best_count {
            best_count = j - i;
            best = v[i];
        }
        i = j;
    }
    best
}

/// The continuous half of a dataset: raw `f64` columns plus the original
/// feature indices they came from.
#[derive(Debug, Clone)]
pub struct ContinuousView {
    pub indices: Vec<usize>,
    pub columns: Vec<Vec<f64>>,
    pub names: Vec<String>,
}

/// The discrete half of a dataset: integer codes remapped to a contiguous
/// `0..v-1` range in first-appearance order.
#[derive(Debug, Clone)]
pub struct DiscreteView {
    pub indices: Vec<usize>,
    pub columns: Vec<Vec<u32>>,
    pub names: Vec<String>,
}

impl ContinuousView {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Split off constant columns; returns the retained view and the
    /// original indices of the dropped columns.
    pub fn split_constant(self) -> (Self, Vec<usize>) {
        let mut kept = ContinuousView {
            indices: Vec::new(),
            columns: Vec::new(),
            names: Vec::new(),
        };
        let mut dropped = Vec::new();
        for ((idx, col), name) in self.indices.into_iter().zip(self.columns).zip(self.names) {
            if col.iter().all(|&v| v == col[0]) {
                dropped.push(idx);
            } else {
                kept.indices.push(idx);
                kept.columns.push(col);
                kept.names.push(name);
            }
        }
        (kept, dropped)
    }
}

impl DiscreteView {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Split off single-code columns; returns the retained view and the
    /// original indices of the dropped columns.
    pub fn split_constant(self) -> (Self, Vec<usize>) {
        let mut kept = DiscreteView {
            indices: Vec::new(),
            columns: Vec::new(),
            names: Vec::new(),
        };
        let mut dropped = Vec::new();
        for ((idx, col), name) in self.indices.into_iter().zip(self.columns).zip(self.names) {
            if col.iter().all(|&v| v == col[0]) {
                dropped.push(idx);
            } else {
                kept.indices.push(idx);
                kept.columns.push(col);
                kept.names.push(name);
            }
        }
        (kept, dropped)
    }
}

/// Split a fully observed dataset into its continuous and discrete views.
/// The two index sets partition `0..m-1`; either may be empty.
pub fn split_by_kind(d: &Dataset) -> (ContinuousView, DiscreteView) {
    debug_assert!(d.fully_observed(), "impute before splitting");
    let mut cont = ContinuousView {
        indices: Vec::new(),
        columns: Vec::new(),
        names: Vec::new(),
    };
    let mut disc = DiscreteView {
        indices: Vec::new(),
        columns: Vec::new(),
        names: Vec::new(),
    };
    for (i, col) in d.columns.iter().enumerate() {
        match col.kind {
            FeatureKind::Continuous => {
                cont.indices.push(i);
                cont.columns.push(col.values.clone());
                cont.names.push(col.name.clone());
            }
            FeatureKind::Discrete => {
                disc.indices.push(i);
                disc.columns.push(code_first_appearance(&col.values));
                disc.names.push(col.name.clone());
            }
        }
    }
    (cont, disc)
}

/// Map raw values to contiguous codes in first-appearance order.
fn code_first_appearance(values: &[f64]) -> Vec<u32> {
    let mut seen: Vec<f64> = Vec::new();
    values
        .iter()
        .map(|&v| {
            let v = v + 0.0; // fold -0.0 into 0.0
            match seen.iter().position(|&s| s == v) {
                Some(p) => p as u32,
                None => {
                    seen.push(v);
                    (seen.len() - 1) as u32
                }
            }
        })
        .collect()
}

/// Z-score every column of a continuous view (population variance). Constant
/// columns come back as all zeros with their flag set.
pub fn standardize(view: &ContinuousView) -> (ContinuousView, Vec<bool>) {
    let mut out = view.clone();
    let mut constant = vec![false; view.len()];
    for (ci, col) in out.columns.iter_mut().enumerate() {
        if col.iter().all(|&v| v == col[0]) {
            col.iter_mut().for_each(|v| *v = 0.0);
            constant[ci] = true;
            continue;
        }
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        col.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    (out, constant)
}
