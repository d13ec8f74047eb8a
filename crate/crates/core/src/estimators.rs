//! Discrete entropy, mutual information and conditional mutual information.
//!
//! Every quantity is in bits. Sets of variables are realized as a single
//! composite variable through [`JointEncoding`], so `I(X_k; Z | Y)` for an
//! arbitrary conditioning set `Z` costs one pass over the rows per entropy.
//!
//! [`EstimatorContext`] counts MI terms: one per [`EstimatorContext::mutual_information`]
//! call and two per [`EstimatorContext::conditional_mutual_information`] call.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::dataset::DiscreteDataset;
use crate::error::{Error, Result};

/// A column addressable by the estimators: a feature or the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Feature(usize),
    Target,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    /// Maximum-likelihood pmf from empirical counts.
    #[default]
    PlugIn,
    /// James-Stein shrinkage of the empirical pmf toward uniform.
    Shrinkage,
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plugin" | "plug-in" => Ok(Self::PlugIn),
            "shrinkage" => Ok(Self::Shrinkage),
            other => Err(Error::InvalidParam(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Composite variable for an ordered list of columns.
#[derive(Debug, Clone)]
pub struct JointEncoding {
    pub members: Vec<Var>,
    pub radices: Vec<u32>,
    /// One dense state per row, injective on observed tuples.
    pub codes: Vec<u32>,
    /// Number of distinct observed states; codes lie in `0..n_states`.
    pub n_states: usize,
    /// Product of the radices (number of possible cells), as a float since it
    /// overflows integers for large conditioning sets.
    pub cells: f64,
}

// dense lookup tables above this many slots switch to hashing
const DENSE_REMAP_LIMIT: u64 = 1 << 24;

impl JointEncoding {
    fn build(columns: &[(&[u32], u32)], members: Vec<Var>, n_rows: usize) -> Self {
        let mut codes = vec![0u32; n_rows];
        let mut n_states: u64 = 1;
        let mut cells = 1.0f64;
        for &(col, arity) in columns {
            let arity = u64::from(arity.max(1));
            cells *= arity as f64;
            let product = n_states * arity;
            if product <= u64::from(u32::MAX) {
                for (c, &v) in codes.iter_mut().zip(col) {
                    *c = (u64::from(*c) * arity + u64::from(v)) as u32;
                }
                n_states = product;
                if n_states > n_rows as u64 {
                    n_states = compress(&mut codes, n_states) as u64;
                }
            } else {
                let wide: Vec<u64> = codes
                    .iter()
                    .zip(col)
                    .map(|(&c, &v)| u64::from(c) * arity + u64::from(v))
                    .collect();
                n_states = compress_wide(&wide, &mut codes) as u64;
            }
        }
        Self {
            members,
            radices: columns.iter().map(|c| c.1).collect(),
            codes,
            n_states: n_states as usize,
            cells,
        }
    }

    /// Occupancy count per state.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_states];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        counts
    }
}

/// Relabels codes to first-appearance order; returns the number of states.
fn compress(codes: &mut [u32], n_states: u64) -> usize {
    if n_states <= DENSE_REMAP_LIMIT {
        let mut map = vec![u32::MAX; n_states as usize];
        let mut next = 0u32;
        for c in codes.iter_mut() {
            let slot = &mut map[*c as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *c = *slot;
        }
        next as usize
    } else {
        let wide: Vec<u64> = codes.iter().map(|&c| u64::from(c)).collect();
        compress_wide(&wide, codes)
    }
}

fn compress_wide(wide: &[u64], out: &mut [u32]) -> usize {
    let mut map: HashMap<u64, u32> = HashMap::new();
    for (o, &w) in out.iter_mut().zip(wide) {
        let next = map.len() as u32;
        *o = *map.entry(w).or_insert(next);
    }
    map.len()
}

fn plugin_entropy(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    h.max(0.0)
}

/// James-Stein shrinkage intensity toward the uniform target over `cells`
/// possible cells, of which `counts` lists the observed ones (zeros allowed).
fn shrinkage_intensity(counts: &[u64], cells: f64) -> f64 {
    let n: u64 = counts.iter().sum();
    if n <= 1 {
        return 1.0;
    }
    let n_f = n as f64;
    let target = 1.0 / cells;
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64 / n_f).powi(2)).sum();
    let listed = counts.len() as f64;
    let misfit: f64 = counts
        .iter()
        .map(|&c| (target - c as f64 / n_f).powi(2))
        .sum::<f64>()
        + (cells - listed).max(0.0) * target * target;
    if misfit <= 0.0 {
        return 0.0;
    }
    ((1.0 - sum_sq) / ((n_f - 1.0) * misfit)).clamp(0.0, 1.0)
}

fn shrinkage_entropy(counts: &[u64], cells: f64) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let lambda = shrinkage_intensity(counts, cells);
    let n_f = n as f64;
    let floor = lambda / cells;
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    let observed: f64 = counts
        .iter()
        .map(|&c| term(floor + (1.0 - lambda) * c as f64 / n_f))
        .sum();
    let unobserved = (cells - counts.len() as f64).max(0.0) * term(floor);
    (observed + unobserved).max(0.0)
}

/// Shrinks an empirical pmf toward uniform: `lambda/K + (1-lambda) * c/n`,
/// with the closed-form intensity clipped to `[0, 1]`.
pub fn shrinkage_pmf(counts: &[u64]) -> Result<Vec<f64>> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::ZeroCount);
    }
    let cells = counts.len() as f64;
    let lambda = shrinkage_intensity(counts, cells);
    Ok(counts
        .iter()
        .map(|&c| lambda / cells + (1.0 - lambda) * c as f64 / n as f64)
        .collect())
}

/// Shrinkage intensity used by [`shrinkage_pmf`].
pub fn shrinkage_lambda(counts: &[u64]) -> Result<f64> {
    if counts.iter().sum::<u64>() == 0 {
        return Err(Error::ZeroCount);
    }
    Ok(shrinkage_intensity(counts, counts.len() as f64))
}

/// Read-only estimator view over a dataset.
#[derive(Debug)]
pub struct EstimatorContext<'a> {
    data: &'a DiscreteDataset,
    kind: EstimatorKind,
    calls: AtomicU64,
}

impl<'a> EstimatorContext<'a> {
    pub fn new(data: &'a DiscreteDataset, kind: EstimatorKind) -> Result<Self> {
        if data.n_rows() == 0 {
            return Err(Error::EmptyTable);
        }
        Ok(Self {
            data,
            kind,
            calls: AtomicU64::new(0),
        })
    }

    pub fn plugin(data: &'a DiscreteDataset) -> Self {
        Self::new(data, EstimatorKind::PlugIn).expect("datasets are never empty")
    }

    pub fn dataset(&self) -> &'a DiscreteDataset {
        self.data
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn n_features(&self) -> usize {
        self.data.n_features()
    }

    fn column(&self, v: Var) -> Result<(&'a [u32], u32)> {
        match v {
            Var::Target => Ok((self.data.target(), self.data.n_classes())),
            Var::Feature(j) if j < self.data.n_features() => {
                Ok((self.data.feature(j), self.data.arity(j)))
            }
            Var::Feature(j) => Err(Error::FeatureOutOfRange(j)),
        }
    }

    pub fn encode(&self, vars: &[Var]) -> Result<JointEncoding> {
        let columns = vars
            .iter()
            .map(|&v| self.column(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(JointEncoding::build(&columns, vars.to_vec(), self.data.n_rows()))
    }

    /// Entropy of a possibly empty variable list (empty gives 0).
    fn h(&self, vars: &[Var]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        let enc = self.encode(vars)?;
        let counts = enc.counts();
        Ok(match self.kind {
            EstimatorKind::PlugIn => plugin_entropy(&counts),
            EstimatorKind::Shrinkage => shrinkage_entropy(&counts, enc.cells),
        })
    }

    fn mi_raw(&self, a: &[Var], b: &[Var]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let ab: Vec<Var> = a.iter().chain(b).copied().collect();
        Ok(self.h(a)? + self.h(b)? - self.h(&ab)?)
    }

    pub fn entropy(&self, vars: &[Var]) -> Result<f64> {
        if vars.is_empty() {
            return Err(Error::EmptyColumnList);
        }
        self.h(vars)
    }

    /// `H(A | B) = H(A, B) - H(B)`; `B` may be empty.
    pub fn conditional_entropy(&self, a: &[Var], b: &[Var]) -> Result<f64> {
        if a.is_empty() {
            return Err(Error::EmptyColumnList);
        }
        let ab: Vec<Var> = a.iter().chain(b).copied().collect();
        Ok((self.h(&ab)? - self.h(b)?).max(0.0))
    }

    /// `I(A; B) = H(A) + H(B) - H(A, B)`, clamped at zero. Counts one MI term.
    pub fn mutual_information(&self, a: &[Var], b: &[Var]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyColumnList);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.mi_raw(a, b)?.max(0.0))
    }

    /// `I(A; B | Z) = I(A ∪ Z; B) - I(Z; B)`, clamped at zero. Counts two MI terms.
    pub fn conditional_mutual_information(&self, a: &[Var], b: &[Var], z: &[Var]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyColumnList);
        }
        self.calls.fetch_add(2, Ordering::Relaxed);
        let az: Vec<Var> = a.iter().chain(z).copied().collect();
        Ok((self.mi_raw(&az, b)? - self.mi_raw(z, b)?).max(0.0))
    }

    /// Entropy form `H(A,Z) + H(B,Z) - H(A,B,Z) - H(Z)`. Not counted.
    pub fn cmi_entropy_form(&self, a: &[Var], b: &[Var], z: &[Var]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyColumnList);
        }
        let az: Vec<Var> = a.iter().chain(z).copied().collect();
        let bz: Vec<Var> = b.iter().chain(z).copied().collect();
        let abz: Vec<Var> = a.iter().chain(b).chain(z).copied().collect();
        Ok(self.h(&az)? + self.h(&bz)? - self.h(&abz)? - self.h(z)?)
    }

    /// MI terms evaluated since the last reset; zeroes the counter.
    pub fn reset_and_read_counter(&self) -> u64 {
        self.calls.swap(0, Ordering::Relaxed)
    }

    /// Current counter value without resetting.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Shorthand for a feature list.
pub fn features(idx: &[usize]) -> Vec<Var> {
    idx.iter().map(|&j| Var::Feature(j)).collect()
}
