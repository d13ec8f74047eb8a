//! Forward-selection score functions `J(X_k | S, Y)`.
//!
//! Every criterion returns `I(X_k; Y)` when nothing has been selected yet, so
//! all of them pick the same first feature.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorContext, Var};
use crate::hocmim::{self, HocmimParams, OrderMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    Mim,
    Mifs,
    Mrmr,
    Jmi,
    Disr,
    Cmim,
    RelaxMrmr,
    Jmi3,
    Jmi4,
    Cmim3,
    Cmim4,
    Hocmim,
    /// Low-order family with user-set beta and gamma.
    Generic,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 13] = [
        Self::Mim,
        Self::Mifs,
        Self::Mrmr,
        Self::Jmi,
        Self::Disr,
        Self::Cmim,
        Self::RelaxMrmr,
        Self::Jmi3,
        Self::Jmi4,
        Self::Cmim3,
        Self::Cmim4,
        Self::Hocmim,
        Self::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mim => "mim",
            Self::Mifs => "mifs",
            Self::Mrmr => "mrmr",
            Self::Jmi => "jmi",
            Self::Disr => "disr",
            Self::Cmim => "cmim",
            Self::RelaxMrmr => "relax-mrmr",
            Self::Jmi3 => "jmi3",
            Self::Jmi4 => "jmi4",
            Self::Cmim3 => "cmim3",
            Self::Cmim4 => "cmim4",
            Self::Hocmim => "hocmim",
            Self::Generic => "generic",
        }
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "mim" => Self::Mim,
            "mifs" => Self::Mifs,
            "mrmr" => Self::Mrmr,
            "jmi" => Self::Jmi,
            "disr" => Self::Disr,
            "cmim" => Self::Cmim,
            "relax-mrmr" | "relaxmrmr" => Self::RelaxMrmr,
            "jmi3" | "jmi-3" => Self::Jmi3,
            "jmi4" | "jmi-4" => Self::Jmi4,
            "cmim3" | "cmim-3" => Self::Cmim3,
            "cmim4" | "cmim-4" => Self::Cmim4,
            "hocmim" => Self::Hocmim,
            "generic" => Self::Generic,
            _ => return Err(Error::InvalidParam(format!("unknown criterion `{s}`"))),
        })
    }
}

/// A score function plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub kind: CriterionKind,
    /// Redundancy weight for MIFS and the generic family.
    pub beta: f64,
    /// Conditional-redundancy weight for the generic family.
    pub gamma: f64,
    pub hocmim: HocmimParams,
}

impl Criterion {
    pub fn new(kind: CriterionKind) -> Self {
        Self {
            kind,
            beta: 1.0,
            gamma: 0.0,
            hocmim: HocmimParams::default(),
        }
    }

    pub fn hocmim(params: HocmimParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            hocmim: params,
            ..Self::new(CriterionKind::Hocmim)
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !matches!(self.kind, CriterionKind::Mifs | CriterionKind::Generic) {
            return Err(Error::InvalidParam(format!(
                "criterion {} takes no beta",
                self.kind.name()
            )));
        }
        if beta.is_nan() || beta < 0.0 || (self.kind == CriterionKind::Mifs && beta > 1.0) {
            return Err(Error::InvalidParam(format!("beta {beta} out of range")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if self.kind != CriterionKind::Generic {
            return Err(Error::InvalidParam(format!(
                "criterion {} takes no gamma",
                self.kind.name()
            )));
        }
        if gamma.is_nan() || gamma < 0.0 {
            return Err(Error::InvalidParam(format!("gamma {gamma} out of range")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_hocmim(mut self, params: HocmimParams) -> Result<Self> {
        if self.kind != CriterionKind::Hocmim {
            return Err(Error::InvalidParam(format!(
                "criterion {} takes no order parameters",
                self.kind.name()
            )));
        }
        params.validate()?;
        self.hocmim = params;
        Ok(self)
    }

    /// Display label, e.g. `hocmim-n2` for fixed order 2.
    pub fn label(&self) -> String {
        match self.kind {
            CriterionKind::Hocmim => match self.hocmim.mode {
                OrderMode::Fixed(n) => format!("hocmim-n{n}"),
                OrderMode::Adaptive => "hocmim".into(),
            },
            CriterionKind::Mifs => format!("mifs(beta={})", self.beta),
            CriterionKind::Generic => format!("generic(beta={},gamma={})", self.beta, self.gamma),
            k => k.name().into(),
        }
    }

    /// `J(X_k | S, Y)`.
    pub fn score(&self, ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<f64> {
        match self.kind {
            CriterionKind::Mim => {
                check_candidate(ctx, k, selected)?;
                relevance(ctx, k)
            }
            CriterionKind::Mifs | CriterionKind::Generic => {
                score_generic(ctx, k, selected, self.beta, self.gamma_for_kind())
            }
            CriterionKind::Mrmr => {
                let beta = inverse_len(selected);
                score_generic(ctx, k, selected, beta, 0.0)
            }
            CriterionKind::Jmi => {
                let w = inverse_len(selected);
                score_generic(ctx, k, selected, w, w)
            }
            CriterionKind::Disr => score_disr(ctx, k, selected),
            CriterionKind::Cmim => score_cmim(ctx, k, selected),
            CriterionKind::RelaxMrmr => score_relax_mrmr(ctx, k, selected),
            CriterionKind::Jmi3 => score_jmi_high(ctx, k, selected, 3),
            CriterionKind::Jmi4 => score_jmi_high(ctx, k, selected, 4),
            CriterionKind::Cmim3 => score_cmim_high(ctx, k, selected, 3),
            CriterionKind::Cmim4 => score_cmim_high(ctx, k, selected, 4),
            CriterionKind::Hocmim => {
                hocmim::hocmim_score(ctx, k, selected, &self.hocmim).map(|(s, _)| s)
            }
        }
    }

    fn gamma_for_kind(&self) -> f64 {
        if self.kind == CriterionKind::Generic {
            self.gamma
        } else {
            0.0
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Anything that scores a candidate against a selected set.
pub trait Scorer: Sync {
    fn score(&self, ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<f64>;

    fn label(&self) -> String;
}

impl Scorer for Criterion {
    fn score(&self, ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<f64> {
        Criterion::score(self, ctx, k, selected)
    }

    fn label(&self) -> String {
        Criterion::label(self)
    }
}

fn inverse_len(selected: &[usize]) -> f64 {
    if selected.is_empty() {
        0.0
    } else {
        1.0 / selected.len() as f64
    }
}

pub(crate) fn check_candidate(ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<()> {
    let d = ctx.n_features();
    if k >= d {
        return Err(Error::FeatureOutOfRange(k));
    }
    if let Some(&j) = selected.iter().find(|&&j| j >= d) {
        return Err(Error::FeatureOutOfRange(j));
    }
    if selected.contains(&k) {
        return Err(Error::CandidateSelected(k));
    }
    Ok(())
}

/// `I(X_k; Y)`.
pub fn relevance(ctx: &EstimatorContext, k: usize) -> Result<f64> {
    ctx.mutual_information(&[Var::Feature(k)], &[Var::Target])
}

/// `I(X_k;Y) - beta * sum I(X_j;X_k) + gamma * sum I(X_j;X_k|Y)`.
/// Terms with zero weight are not evaluated.
pub fn score_generic(
    ctx: &EstimatorContext,
    k: usize,
    selected: &[usize],
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    check_candidate(ctx, k, selected)?;
    let xk = [Var::Feature(k)];
    let mut score = relevance(ctx, k)?;
    for &j in selected {
        let xj = [Var::Feature(j)];
        if beta != 0.0 {
            score -= beta * ctx.mutual_information(&xj, &xk)?;
        }
        if gamma != 0.0 {
            score += gamma * ctx.conditional_mutual_information(&xj, &xk, &[Var::Target])?;
        }
    }
    Ok(score)
}

/// `sum_j I(X_k,X_j; Y) / H(X_k,X_j,Y)`; a term with zero joint entropy adds 0.
pub fn score_disr(ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<f64> {
    check_candidate(ctx, k, selected)?;
    if selected.is_empty() {
        return relevance(ctx, k);
    }
    let mut score = 0.0;
    for &j in selected {
        let pair = [Var::Feature(k), Var::Feature(j)];
        let mi = ctx.mutual_information(&pair, &[Var::Target])?;
        let h = ctx.entropy(&[Var::Feature(k), Var::Feature(j), Var::Target])?;
        if h > 1e-12 {
            score += mi / h;
        }
    }
    Ok(score)
}

/// `min_j I(X_k; Y | X_j)`.
pub fn score_cmim(ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<f64> {
    check_candidate(ctx, k, selected)?;
    if selected.is_empty() {
        return relevance(ctx, k);
    }
    let mut best = f64::INFINITY;
    for &j in selected {
        let v = ctx.conditional_mutual_information(
            &[Var::Feature(k)],
            &[Var::Target],
            &[Var::Feature(j)],
        )?;
        best = best.min(v);
    }
    Ok(best)
}

/// JMI with `eta = 1/(|S|(|S|-1))` times `sum_{j != i} I(X_k; X_i | X_j)` subtracted.
pub fn score_relax_mrmr(ctx: &EstimatorContext, k: usize, selected: &[usize]) -> Result<f64> {
    let w = inverse_len(selected);
    let mut score = score_generic(ctx, k, selected, w, w)?;
    let s = selected.len();
    if s >= 2 {
        let eta = 1.0 / (s * (s - 1)) as f64;
        let mut third = 0.0;
        for &j in selected {
            for &i in selected.iter().filter(|&&i| i != j) {
                third += ctx.conditional_mutual_information(
                    &[Var::Feature(k)],
                    &[Var::Feature(i)],
                    &[Var::Feature(j)],
                )?;
            }
        }
        score -= eta * third;
    }
    Ok(score)
}

/// Calls `f` on every `size`-subset of `items` in lexicographic order.
pub(crate) fn for_each_subset<F>(items: &[usize], size: usize, mut f: F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    fn rec<F: FnMut(&[usize]) -> Result<()>>(
        items: &[usize],
        size: usize,
        start: usize,
        buf: &mut Vec<usize>,
        f: &mut F,
    ) -> Result<()> {
        if buf.len() == size {
            return f(buf);
        }
        for i in start..items.len() {
            if items.len() - i < size - buf.len() {
                break;
            }
            buf.push(items[i]);
            rec(items, size, i + 1, buf, f)?;
            buf.pop();
        }
        Ok(())
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), &mut f)
}

/// Ordered-tuple sums of `I(X_j,X_i(,X_t),X_k; Y)`. Each unordered subset is
/// evaluated once and weighted by its number of orderings. Falls back
/// JMI-4 to JMI-3 to JMI when fewer than `order - 1` features are selected.
pub fn score_jmi_high(ctx: &EstimatorContext, k: usize, selected: &[usize], order: usize) -> Result<f64> {
    check_candidate(ctx, k, selected)?;
    if !(order == 3 || order == 4) {
        return Err(Error::InvalidParam(format!("order {order} is not 3 or 4")));
    }
    let s = selected.len();
    if s < order - 1 {
        return if order == 4 {
            score_jmi_high(ctx, k, selected, 3)
        } else {
            let w = inverse_len(selected);
            score_generic(ctx, k, selected, w, w)
        };
    }
    let orderings = if order == 3 { 2.0 } else { 6.0 };
    let mut sum = 0.0;
    for_each_subset(selected, order - 1, |sub| {
        let mut vars: Vec<Var> = sub.iter().map(|&j| Var::Feature(j)).collect();
        vars.push(Var::Feature(k));
        sum += ctx.mutual_information(&vars, &[Var::Target])?;
        Ok(())
    })?;
    Ok(orderings * sum)
}

/// `min I(X_k; Y | X_j, X_i(, X_t))` over all `(order-1)`-subsets of the
/// selected set, falling back CMIM-4 to CMIM-3 to CMIM.
pub fn score_cmim_high(ctx: &EstimatorContext, k: usize, selected: &[usize], order: usize) -> Result<f64> {
    check_candidate(ctx, k, selected)?;
    if !(order == 3 || order == 4) {
        return Err(Error::InvalidParam(format!("order {order} is not 3 or 4")));
    }
    if selected.len() < order - 1 {
        return if order == 4 {
            score_cmim_high(ctx, k, selected, 3)
        } else {
            score_cmim(ctx, k, selected)
        };
    }
    let mut best = f64::INFINITY;
    for_each_subset(selected, order - 1, |sub| {
        let z: Vec<Var> = sub.iter().map(|&j| Var::Feature(j)).collect();
        let v = ctx.conditional_mutual_information(&[Var::Feature(k)], &[Var::Target], &z)?;
        best = best.min(v);
        Ok(())
    })?;
    Ok(best)
}
