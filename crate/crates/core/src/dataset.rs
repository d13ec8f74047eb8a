//! Tabular ingestion, equal-width discretization and repeated holdout splits.
//!
//! A [`RawTable`] holds typed columns as read from CSV. [`fit_binning`] learns
//! per-column encodings on a subset of rows and [`apply_binning`] turns the
//! whole table into a [`DiscreteDataset`] of dense integer codes.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn is_numeric(&self) -> bool {
        matches!(self, ColumnData::Numeric(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// Typed table with a designated target column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<Column>,
    target: usize,
    n_rows: usize,
}

impl RawTable {
    pub fn new(columns: Vec<Column>, target_name: &str) -> Result<Self> {
        let target = columns
            .iter()
            .position(|c| c.name == target_name)
            .ok_or_else(|| Error::MissingTarget(target_name.to_string()))?;
        let n_rows = columns[target].data.len();
        if n_rows == 0 {
            return Err(Error::EmptyTable);
        }
        if let Some(c) = columns.iter().find(|c| c.data.len() != n_rows) {
            return Err(Error::ColumnMismatch(format!(
                "column `{}` has {} rows, expected {n_rows}",
                c.name,
                c.data.len()
            )));
        }
        if let ColumnData::Numeric(v) = &columns[target].data {
            if v.iter().any(|x| x.fract() != 0.0) {
                return Err(Error::InvalidTarget(format!(
                    "numeric target `{target_name}` must be integer-valued"
                )));
            }
        }
        Ok(Self {
            columns,
            target,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn target_name(&self) -> &str {
        &self.columns[self.target].name
    }

    pub fn target_column(&self) -> &Column {
        &self.columns[self.target]
    }

    /// Non-target columns in file order.
    pub fn feature_columns(&self) -> impl Iterator<Item = &Column> {
        let target = self.target;
        self.columns
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != target)
            .map(|(_, c)| c)
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }
}

/// Reads a comma-separated file with a header row.
pub fn load_csv(path: impl AsRef<Path>, target_name: &str) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, target_name)
}

/// Like [`load_csv`], with the last column as the target when none is named.
pub fn load_csv_default_target(path: impl AsRef<Path>, target_name: Option<&str>) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, target_name)
}

/// Parses CSV from any reader. Columns whose every cell parses as a number are
/// numeric, everything else is categorical.
pub fn read_csv<R: Read>(reader: R, target_name: &str) -> Result<RawTable> {
    parse_csv(reader, Some(target_name))
}

fn parse_csv<R: Read>(reader: R, target_name: Option<&str>) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let width = header.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); width];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::RaggedRow {
                line: i + 2,
                expected: width,
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row: i,
                    column: header[j].clone(),
                });
            }
            cells[j].push(cell.to_string());
        }
    }
    if cells.first().is_none_or(|c| c.is_empty()) {
        return Err(Error::EmptyTable);
    }
    let columns = header
        .into_iter()
        .zip(cells)
        .map(|(name, raw)| {
            let parsed: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
            let data = match parsed {
                Some(v) if v.iter().all(|x| x.is_finite()) => ColumnData::Numeric(v),
                _ => ColumnData::Categorical(raw),
            };
            Column { name, data }
        })
        .collect::<Vec<Column>>();
    let target = match target_name {
        Some(t) => t.to_string(),
        None => columns.last().map(|c| c.name.clone()).unwrap_or_default(),
    };
    RawTable::new(columns, &target)
}

/// Integer-coded features plus class labels, stored column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDataset {
    feature_names: Vec<String>,
    features: Vec<Vec<u32>>,
    arities: Vec<u32>,
    target_name: String,
    target: Vec<u32>,
    n_classes: u32,
}

impl DiscreteDataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<Vec<u32>>,
        arities: Vec<u32>,
        target_name: String,
        target: Vec<u32>,
        n_classes: u32,
    ) -> Result<Self> {
        let n = target.len();
        if n == 0 {
            return Err(Error::EmptyTable);
        }
        if feature_names.len() != features.len() || arities.len() != features.len() {
            return Err(Error::InvalidDataset(
                "feature names, columns and arities differ in length".into(),
            ));
        }
        if n_classes < 2 {
            return Err(Error::InvalidTarget(format!(
                "need at least 2 classes, got {n_classes}"
            )));
        }
        if target.iter().any(|&y| y >= n_classes) {
            return Err(Error::InvalidDataset("class label >= class count".into()));
        }
        for (j, (col, &arity)) in features.iter().zip(&arities).enumerate() {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "feature {j} has {} rows, expected {n}",
                    col.len()
                )));
            }
            if arity == 0 {
                return Err(Error::InvalidDataset(format!("feature {j} has arity 0")));
            }
            if col.iter().any(|&c| c >= arity) {
                return Err(Error::InvalidDataset(format!(
                    "feature {j} has a code >= its arity {arity}"
                )));
            }
        }
        Ok(Self {
            feature_names,
            features,
            arities,
            target_name,
            target,
            n_classes,
        })
    }

    /// Builds a dataset from columns, inferring each arity as `max + 1`.
    pub fn from_columns(features: Vec<Vec<u32>>, target: Vec<u32>) -> Result<Self> {
        let arities = features
            .iter()
            .map(|c| c.iter().copied().max().unwrap_or(0) + 1)
            .collect();
        let names = (0..features.len()).map(|j| format!("X{}", j + 1)).collect();
        let n_classes = (target.iter().copied().max().unwrap_or(0) + 1).max(2);
        Self::new(names, features, arities, "Y".into(), target, n_classes)
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, j: usize) -> &[u32] {
        &self.features[j]
    }

    pub fn arity(&self, j: usize) -> u32 {
        self.arities[j]
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    pub fn target(&self) -> &[u32] {
        &self.target
    }

    pub fn n_classes(&self) -> u32 {
        self.n_classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Restricts to the given rows, keeping arities and class count.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::InvalidSplit(format!("row {r} out of range")));
        }
        let pick = |col: &[u32]| rows.iter().map(|&r| col[r]).collect::<Vec<_>>();
        Ok(Self {
            feature_names: self.feature_names.clone(),
            features: self.features.iter().map(|c| pick(c)).collect(),
            arities: self.arities.clone(),
            target_name: self.target_name.clone(),
            target: pick(&self.target),
            n_classes: self.n_classes,
        })
    }

    /// Plain-text dump: a header line `name:arity` per feature plus the target,
    /// followed by one comma-separated row of codes per sample.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut head: Vec<String> = self
            .feature_names
            .iter()
            .zip(&self.arities)
            .map(|(n, a)| format!("{n}:{a}"))
            .collect();
        head.push(format!("{}:{}", self.target_name, self.n_classes));
        out.push_str(&head.join(","));
        out.push('\n');
        for i in 0..self.n_rows() {
            let mut row: Vec<String> = self.features.iter().map(|c| c[i].to_string()).collect();
            row.push(self.target[i].to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per-column encoding learned by [`fit_binning`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnBinning {
    Numeric {
        /// Interior cut points, strictly increasing; empty for a constant column.
        edges: Vec<f64>,
        /// Raw bin index to dense code, `None` for bins unoccupied on the fitting rows.
        dense: Vec<Option<u32>>,
        arity: u32,
    },
    Categorical {
        /// Labels in code order (first appearance on the fitting rows).
        labels: Vec<String>,
    },
}

impl ColumnBinning {
    fn fitted_arity(&self) -> u32 {
        match self {
            ColumnBinning::Numeric { arity, .. } => *arity,
            ColumnBinning::Categorical { labels } => labels.len() as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n_bins: usize,
    pub columns: Vec<(String, ColumnBinning)>,
    target_name: String,
    /// Class labels in code order.
    classes: Vec<String>,
}

fn equal_width_edges(min: f64, max: f64, n_bins: usize) -> Vec<f64> {
    if n_bins <= 1 || max <= min {
        return Vec::new();
    }
    let width = (max - min) / n_bins as f64;
    let mut edges: Vec<f64> = (1..n_bins).map(|i| min + width * i as f64).collect();
    edges.dedup();
    edges
}

fn raw_bin(edges: &[f64], v: f64) -> usize {
    edges.partition_point(|&e| e <= v)
}

fn class_key(v: f64) -> String {
    format!("{}", v as i64)
}

fn target_labels(col: &Column) -> Vec<String> {
    match &col.data {
        ColumnData::Numeric(v) => {
            let mut vals: Vec<i64> = v.iter().map(|&x| x as i64).collect();
            vals.sort_unstable();
            vals.dedup();
            vals.into_iter().map(|x| x.to_string()).collect()
        }
        ColumnData::Categorical(v) => {
            let mut seen = Vec::new();
            for s in v {
                if !seen.contains(s) {
                    seen.push(s.clone());
                }
            }
            seen
        }
    }
}

/// Learns equal-width edges for numeric columns and label dictionaries for
/// categorical ones, using only `fit_rows`. The class dictionary is built from
/// all rows so every row has a label code.
pub fn fit_binning(table: &RawTable, n_bins: usize, fit_rows: &[usize]) -> Result<BinningSpec> {
    if n_bins == 0 {
        return Err(Error::InvalidParam("n_bins must be at least 1".into()));
    }
    if fit_rows.is_empty() {
        return Err(Error::InvalidSplit("no fitting rows".into()));
    }
    if let Some(&r) = fit_rows.iter().find(|&&r| r >= table.n_rows()) {
        return Err(Error::InvalidSplit(format!("row {r} out of range")));
    }
    let columns = table
        .feature_columns()
        .map(|col| {
            let binning = match &col.data {
                ColumnData::Numeric(v) => {
                    let (min, max) = fit_rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                        (lo.min(v[r]), hi.max(v[r]))
                    });
                    let edges = equal_width_edges(min, max, n_bins);
                    let mut occupied = vec![false; edges.len() + 1];
                    for &r in fit_rows {
                        occupied[raw_bin(&edges, v[r])] = true;
                    }
                    let mut next = 0u32;
                    let dense = occupied
                        .iter()
                        .map(|&o| {
                            o.then(|| {
                                next += 1;
                                next - 1
                            })
                        })
                        .collect();
                    ColumnBinning::Numeric {
                        edges,
                        dense,
                        arity: next,
                    }
                }
                ColumnData::Categorical(v) => {
                    let mut labels: Vec<String> = Vec::new();
                    let mut seen = HashMap::new();
                    for &r in fit_rows {
                        if !seen.contains_key(&v[r]) {
                            seen.insert(v[r].clone(), labels.len());
                            labels.push(v[r].clone());
                        }
                    }
                    ColumnBinning::Categorical { labels }
                }
            };
            (col.name.clone(), binning)
        })
        .collect();
    let classes = target_labels(table.target_column());
    if classes.len() < 2 {
        return Err(Error::InvalidTarget(format!(
            "target `{}` has fewer than 2 classes",
            table.target_name()
        )));
    }
    Ok(BinningSpec {
        n_bins,
        columns,
        target_name: table.target_name().to_string(),
        classes,
    })
}

fn numeric_code(edges: &[f64], dense: &[Option<u32>], v: f64) -> u32 {
    let bin = raw_bin(edges, v);
    // unoccupied bin: nearest occupied bin below, else the lowest occupied one
    dense[..=bin]
        .iter()
        .rev()
        .find_map(|d| *d)
        .or_else(|| dense.iter().find_map(|d| *d))
        .unwrap_or(0)
}

/// Encodes every row of `table` with a previously fitted spec.
pub fn apply_binning(table: &RawTable, spec: &BinningSpec) -> Result<DiscreteDataset> {
    if table.target_name() != spec.target_name {
        return Err(Error::ColumnMismatch(format!(
            "target `{}` vs fitted `{}`",
            table.target_name(),
            spec.target_name
        )));
    }
    if table.n_features() != spec.columns.len() {
        return Err(Error::ColumnMismatch(format!(
            "{} feature columns vs {} fitted",
            table.n_features(),
            spec.columns.len()
        )));
    }
    let mut names = Vec::with_capacity(spec.columns.len());
    let mut features = Vec::with_capacity(spec.columns.len());
    let mut arities = Vec::with_capacity(spec.columns.len());
    for (col, (name, binning)) in table.feature_columns().zip(&spec.columns) {
        if &col.name != name {
            return Err(Error::ColumnMismatch(format!(
                "column `{}` vs fitted `{name}`",
                col.name
            )));
        }
        let mut arity = binning.fitted_arity().max(1);
        let codes = match (&col.data, binning) {
            (ColumnData::Numeric(v), ColumnBinning::Numeric { edges, dense, .. }) => {
                v.iter().map(|&x| numeric_code(edges, dense, x)).collect()
            }
            (ColumnData::Categorical(v), ColumnBinning::Categorical { labels }) => {
                let lookup: HashMap<&str, u32> = labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i as u32))
                    .collect();
                let unknown = labels.len() as u32;
                let codes: Vec<u32> = v
                    .iter()
                    .map(|s| lookup.get(s.as_str()).copied().unwrap_or(unknown))
                    .collect();
                if codes.contains(&unknown) {
                    arity = unknown + 1;
                }
                codes
            }
            (data, _) => {
                return Err(Error::ColumnMismatch(format!(
                    "column `{name}` is {} but was fitted as the other type",
                    if data.is_numeric() { "numeric" } else { "categorical" }
                )))
            }
        };
        names.push(name.clone());
        features.push(codes);
        arities.push(arity);
    }
    let class_code: HashMap<&str, u32> = spec
        .classes
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as u32))
        .collect();
    let target = match &table.target_column().data {
        ColumnData::Numeric(v) => v
            .iter()
            .map(|&x| class_code.get(class_key(x).as_str()).copied())
            .collect::<Option<Vec<_>>>(),
        ColumnData::Categorical(v) => v
            .iter()
            .map(|s| class_code.get(s.as_str()).copied())
            .collect::<Option<Vec<_>>>(),
    }
    .ok_or_else(|| Error::InvalidTarget("class label not seen when fitting".into()))?;
    DiscreteDataset::new(
        names,
        features,
        arities,
        spec.target_name.clone(),
        target,
        spec.classes.len() as u32,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub n_repeats: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.5,
            seed: 0,
            n_repeats: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffles cut at `floor(train_fraction * n_rows)`. Index lists are
/// returned sorted.
pub fn make_splits(n_rows: usize, spec: &SplitSpec) -> Result<Vec<Split>> {
    if n_rows < 2 {
        return Err(Error::InvalidSplit(format!("need at least 2 rows, got {n_rows}")));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "train fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let n_train = (spec.train_fraction * n_rows as f64).floor() as usize;
    if n_train == 0 || n_train == n_rows {
        return Err(Error::InvalidSplit(format!(
            "fraction {} leaves one side empty for {n_rows} rows",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..n_rows).collect();
    Ok((0..spec.n_repeats)
        .map(|_| {
            order.shuffle(&mut rng);
            let mut train = order[..n_train].to_vec();
            let mut test = order[n_train..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Split { train, test }
        })
        .collect())
}
