//! KNN evaluation of selected subsets over repeated holdout splits.

use std::borrow::Cow;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::Criterion;
use crate::dataset::{apply_binning, fit_binning, DiscreteDataset, RawTable, Split};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorContext, EstimatorKind};
use crate::selection::run_sfs;
use crate::synth::{xor_dataset, XorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Euclidean distance on the integer codes.
    #[default]
    Codes,
    /// Euclidean distance on one-hot indicators, i.e. `sqrt(2 * mismatches)`.
    OneHot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    pub representation: Representation,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 3,
            representation: Representation::Codes,
        }
    }
}

fn sq_distance(data: &DiscreteDataset, subset: &[usize], a: usize, b: usize, rep: Representation) -> u64 {
    subset
        .iter()
        .map(|&j| {
            let col = data.feature(j);
            let (x, y) = (col[a], col[b]);
            match rep {
                Representation::Codes => u64::from(x.abs_diff(y)).pow(2),
                Representation::OneHot => 2 * u64::from(x != y),
            }
        })
        .sum()
}

/// Predicts the class of each test row from its `k` nearest training rows.
///
/// Equal distances favor the lower row index; equal vote counts favor the
/// lowest class label.
pub fn knn_classify(
    data: &DiscreteDataset,
    train: &[usize],
    test: &[usize],
    subset: &[usize],
    cfg: &KnnConfig,
) -> Result<Vec<u32>> {
    if train.is_empty() {
        return Err(Error::EmptyTraining);
    }
    if subset.is_empty() {
        return Err(Error::EmptyColumnList);
    }
    if cfg.k == 0 {
        return Err(Error::InvalidParam("knn k must be at least 1".into()));
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= data.n_features()) {
        return Err(Error::FeatureOutOfRange(j));
    }
    if let Some(&r) = train.iter().chain(test).find(|&&r| r >= data.n_rows()) {
        return Err(Error::InvalidSplit(format!("row {r} out of range")));
    }
    let k = cfg.k.min(train.len());
    let y = data.target();
    let mut votes = vec![0usize; data.n_classes() as usize];
    let mut neighbours: Vec<(u64, usize)> = Vec::with_capacity(train.len());
    Ok(test
        .iter()
        .map(|&t| {
            neighbours.clear();
            neighbours.extend(
                train
                    .iter()
                    .map(|&r| (sq_distance(data, subset, t, r, cfg.representation), r)),
            );
            if k < neighbours.len() {
                neighbours.select_nth_unstable(k - 1);
            }
            votes.iter_mut().for_each(|v| *v = 0);
            for &(_, r) in &neighbours[..k] {
                votes[y[r] as usize] += 1;
            }
            let mut best = 0;
            for (c, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect())
}

/// Fraction of `test` rows misclassified.
pub fn misclassification_error(
    data: &DiscreteDataset,
    train: &[usize],
    test: &[usize],
    subset: &[usize],
    cfg: &KnnConfig,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidSplit("empty test set".into()));
    }
    let pred = knn_classify(data, train, test, subset, cfg)?;
    let wrong = pred
        .iter()
        .zip(test)
        .filter(|(&p, &r)| p != data.target()[r])
        .count();
    Ok(wrong as f64 / test.len() as f64)
}

/// Anything that orders features from a training dataset.
pub trait FeatureRanker: Sync {
    fn select(&self, train: &DiscreteDataset, k: usize) -> Result<Vec<usize>>;
    fn label(&self) -> String;
}

/// A criterion paired with the estimator used to score it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionRanker {
    pub criterion: Criterion,
    pub estimator: EstimatorKind,
}

impl CriterionRanker {
    pub fn new(criterion: Criterion) -> Self {
        Self {
            criterion,
            estimator: EstimatorKind::PlugIn,
        }
    }
}

impl FeatureRanker for CriterionRanker {
    fn select(&self, train: &DiscreteDataset, k: usize) -> Result<Vec<usize>> {
        let ctx = EstimatorContext::new(train, self.estimator)?;
        Ok(run_sfs(&ctx, &self.criterion, k)?.order)
    }

    fn label(&self) -> String {
        self.criterion.label()
    }
}

/// Returns a fixed order regardless of the data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedOrder {
    pub name: String,
    pub order: Vec<usize>,
}

impl FeatureRanker for FixedOrder {
    fn select(&self, train: &DiscreteDataset, k: usize) -> Result<Vec<usize>> {
        if k > self.order.len() {
            return Err(Error::KOutOfRange {
                k,
                d: train.n_features().min(self.order.len()),
            });
        }
        Ok(self.order[..k].to_vec())
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Where a benchmark gets its discrete data for each split.
#[derive(Debug, Clone, Copy)]
pub enum DataSource<'a> {
    /// Raw columns discretized per split: binning is fit on the training rows,
    /// or on all rows when `global` is set.
    Raw {
        table: &'a RawTable,
        n_bins: usize,
        global: bool,
    },
    /// Already discrete; used as is.
    Discrete(&'a DiscreteDataset),
}

impl<'a> DataSource<'a> {
    pub fn n_rows(&self) -> usize {
        match self {
            DataSource::Raw { table, .. } => table.n_rows(),
            DataSource::Discrete(ds) => ds.n_rows(),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            DataSource::Raw { table, .. } => table.n_features(),
            DataSource::Discrete(ds) => ds.n_features(),
        }
    }

    /// All rows discretized with a binning fit for this split.
    pub fn prepare(&self, train: &[usize]) -> Result<Cow<'a, DiscreteDataset>> {
        match *self {
            DataSource::Discrete(ds) => Ok(Cow::Borrowed(ds)),
            DataSource::Raw { table, n_bins, global } => {
                let all: Vec<usize>;
                let fit_rows = if global {
                    all = (0..table.n_rows()).collect();
                    &all[..]
                } else {
                    train
                };
                let spec = fit_binning(table, n_bins, fit_rows)?;
                Ok(Cow::Owned(apply_binning(table, &spec)?))
            }
        }
    }
}

/// One split: the ranker's order on the training rows and the test error of
/// every prefix of length `1..=k_max`.
fn evaluate_split(
    source: &DataSource,
    ranker: &dyn FeatureRanker,
    split: &Split,
    k_max: usize,
    knn: &KnnConfig,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let data = source.prepare(&split.train)?;
    evaluate_prepared(&data, ranker, split, k_max, knn)
}

fn evaluate_prepared(
    data: &DiscreteDataset,
    ranker: &dyn FeatureRanker,
    split: &Split,
    k_max: usize,
    knn: &KnnConfig,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let train = data.select_rows(&split.train)?;
    let order = ranker.select(&train, k_max)?;
    let errors = (1..=k_max)
        .map(|k| misclassification_error(data, &split.train, &split.test, &order[..k], knn))
        .collect::<Result<_>>()?;
    Ok((order, errors))
}

fn check_k_max(k_max: usize, d: usize) -> Result<()> {
    if k_max == 0 || k_max > d {
        return Err(Error::KOutOfRange { k: k_max, d });
    }
    Ok(())
}

/// Mean test error for each prefix length `1..=k_max`, averaged over splits.
pub fn error_curve(
    source: &DataSource,
    ranker: &dyn FeatureRanker,
    splits: &[Split],
    k_max: usize,
    knn: &KnnConfig,
) -> Result<Vec<f64>> {
    check_k_max(k_max, source.n_features())?;
    if splits.is_empty() {
        return Err(Error::InvalidSplit("no splits".into()));
    }
    let per_split: Vec<Vec<f64>> = splits
        .par_iter()
        .map(|s| evaluate_split(source, ranker, s, k_max, knn).map(|(_, e)| e))
        .collect::<Result<_>>()?;
    Ok(mean_over_repeats(&per_split, k_max))
}

fn mean_over_repeats(per_split: &[Vec<f64>], k_max: usize) -> Vec<f64> {
    (0..k_max)
        .map(|k| per_split.iter().map(|e| e[k]).sum::<f64>() / per_split.len() as f64)
        .collect()
}

/// Average ranks, 1 for the lowest error; tied values share the mean of the
/// ranks they span.
pub fn average_ranks(errors: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..errors.len()).collect();
    idx.sort_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; errors.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && errors[idx[j + 1]] == errors[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &r in &idx[i..=j] {
            ranks[r] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Errors of several rankers on the same splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub criteria: Vec<String>,
    pub k_max: usize,
    pub n_repeats: usize,
    /// `errors[c][r][k - 1]`: test error of ranker `c` on split `r` with its top `k`.
    pub errors: Vec<Vec<Vec<f64>>>,
    /// `selections[c][r]`: the top-`k_max` order chosen on split `r`.
    pub selections: Vec<Vec<Vec<usize>>>,
    /// `mean_errors[c][k - 1]`.
    pub mean_errors: Vec<Vec<f64>>,
    /// `ranks[k - 1][c]`: average rank of each ranker at top `k`.
    pub ranks: Vec<Vec<f64>>,
    /// Mean of `ranks` over every `k`.
    pub average_rank: Vec<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Mean errors as a criteria x top-K matrix.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("criterion");
        for k in 1..=self.k_max {
            let _ = write!(out, ",k{k}");
        }
        out.push('\n');
        for (name, row) in self.criteria.iter().zip(&self.mean_errors) {
            out.push_str(name);
            for e in row {
                let _ = write!(out, ",{e}");
            }
            out.push('\n');
        }
        out
    }

    /// One row per top-K with `error(rank)` cells and a final average-rank row.
    pub fn to_text(&self) -> String {
        let width = self.criteria.iter().map(String::len).max().unwrap_or(0).max(12);
        let mut out = format!("{:<6}", "top-k");
        for name in &self.criteria {
            let _ = write!(out, " {name:>width$}");
        }
        out.push('\n');
        for k in 0..self.k_max {
            let _ = write!(out, "{:<6}", k + 1);
            for c in 0..self.criteria.len() {
                let cell = format!("{:.3}({})", self.mean_errors[c][k], fmt_rank(self.ranks[k][c]));
                let _ = write!(out, " {cell:>width$}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<6}", "avg");
        for r in &self.average_rank {
            let cell = format!("{r:.2}");
            let _ = write!(out, " {cell:>width$}");
        }
        out.push('\n');
        out
    }
}

fn fmt_rank(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{}", r as u64)
    } else {
        format!("{r}")
    }
}

/// Runs every ranker on every split and evaluates prefixes `1..=k_max`.
/// Splits run in parallel; the report does not depend on the thread count.
pub fn benchmark(
    source: &DataSource,
    rankers: &[&dyn FeatureRanker],
    splits: &[Split],
    k_max: usize,
    knn: &KnnConfig,
) -> Result<EvalReport> {
    if rankers.is_empty() {
        return Err(Error::InvalidParam("no criteria to compare".into()));
    }
    if splits.is_empty() {
        return Err(Error::InvalidSplit("no splits".into()));
    }
    check_k_max(k_max, source.n_features())?;

    let per_split: Vec<Vec<(Vec<usize>, Vec<f64>)>> = splits
        .par_iter()
        .map(|split| {
            let data = source.prepare(&split.train)?;
            rankers
                .iter()
                .map(|r| evaluate_prepared(&data, *r, split, k_max, knn))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let m = rankers.len();
    let mut errors = vec![Vec::with_capacity(splits.len()); m];
    let mut selections = vec![Vec::with_capacity(splits.len()); m];
    for split in per_split {
        for (c, (order, errs)) in split.into_iter().enumerate() {
            selections[c].push(order);
            errors[c].push(errs);
        }
    }
    let mean_errors: Vec<Vec<f64>> = errors.iter().map(|e| mean_over_repeats(e, k_max)).collect();
    let ranks: Vec<Vec<f64>> = (0..k_max)
        .map(|k| average_ranks(&mean_errors.iter().map(|row| row[k]).collect::<Vec<_>>()))
        .collect();
    let average_rank = (0..m)
        .map(|c| ranks.iter().map(|r| r[c]).sum::<f64>() / k_max as f64)
        .collect();

    Ok(EvalReport {
        criteria: rankers.iter().map(|r| r.label()).collect(),
        k_max,
        n_repeats: splits.len(),
        errors,
        selections,
        mean_errors,
        ranks,
        average_rank,
    })
}

/// Number of seeds, out of `seeds`, whose generated parity dataset gets its
/// four relevant bits as the ranker's top four.
pub fn xor_recovery(
    ranker: &dyn FeatureRanker,
    spec: &XorSpec,
    seeds: std::ops::Range<u64>,
) -> Result<usize> {
    let hits: Vec<bool> = seeds
        .into_par_iter()
        .map(|seed| {
            let ds = xor_dataset(spec, seed);
            let mut top = ranker.select(&ds, 4)?;
            top.sort_unstable();
            Ok(top == [0, 1, 2, 3])
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().filter(|&h| h).count())
}
