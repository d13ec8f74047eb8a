//! High-order conditional mutual information maximization.
//!
//! The conditional mutual information of a candidate splits into relevance
//! and total redundancy:
//!
//! ```text
//! I(X_k; Y | S) = I(X_k; Y) - R(X_k, S, Y),   R(X_k, S, Y) = I(X_k; S) - I(X_k; S | Y)
//! ```
//!
//! The total redundancy is approximated on a representative subset `Z ⊆ S`
//! that maximizes it. `Z` is grown greedily along the chain expansion
//!
//! ```text
//! R(X_k, Z, Y) = Σ_j [ I(X_k; Z_j | Z_<j) - I(X_k; Z_j | Y, Z_<j) ]
//! ```
//!
//! one element at a time, each step taking the largest increment. In adaptive
//! mode growth stops once `1 - R / I(X_k; Y) < ε*`, i.e. the redundancy is
//! close to its upper bound `I(X_k; Y)`. The score is `I(X_k; Y) - R`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{check_candidate, for_each_subset, relevance};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorContext, Var};
use crate::selection::{argmax_lowest, check_k, SelectionResult};

/// Relevances at or below this are treated as zero; the normalized stopping
/// rule is skipped for them.
pub const ZERO_RELEVANCE: f64 = 1e-12;

/// Upper bound on subsets visited by [`hocmim_score_exhaustive`].
pub const EXHAUSTIVE_LIMIT: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderMode {
    Adaptive,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HocmimParams {
    pub epsilon_star: f64,
    pub n_max: usize,
    pub mode: OrderMode,
}

impl Default for HocmimParams {
    fn default() -> Self {
        Self {
            epsilon_star: 0.01,
            n_max: 15,
            mode: OrderMode::Adaptive,
        }
    }
}

impl HocmimParams {
    pub fn fixed(n: usize) -> Self {
        Self {
            mode: OrderMode::Fixed(n),
            n_max: n.max(HocmimParams::default().n_max),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon_star) {
            return Err(Error::InvalidParam(format!(
                "epsilon* {} outside [0, 1]",
                self.epsilon_star
            )));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidParam("n_max must be at least 1".into()));
        }
        if let OrderMode::Fixed(n) = self.mode {
            if n == 0 || n > self.n_max {
                return Err(Error::InvalidParam(format!(
                    "fixed order {n} outside 1..={}",
                    self.n_max
                )));
            }
        }
        Ok(())
    }

    /// Largest order the greedy search may reach.
    pub fn order_limit(&self) -> usize {
        match self.mode {
            OrderMode::Fixed(n) => n,
            OrderMode::Adaptive => self.n_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Normalized distance to the redundancy bound fell below ε*.
    Threshold,
    /// The order limit (fixed n or n_max) was reached.
    NMax,
    /// Every selected feature is in the representative set.
    SExhausted,
}

/// Greedy representative-set search for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyTrace {
    pub candidate: usize,
    pub relevance: f64,
    /// `Z_1..Z_m` in selection order.
    pub representatives: Vec<usize>,
    /// `ΔR_j = I(X_k; Z_j | Z_<j) - I(X_k; Z_j | Y, Z_<j)`.
    pub increments: Vec<f64>,
    /// `R_m`, the running sum of the increments.
    pub redundancy: f64,
    pub stop_reason: StopReason,
}

impl RedundancyTrace {
    pub fn order(&self) -> usize {
        self.representatives.len()
    }

    pub fn score(&self) -> f64 {
        self.relevance - self.redundancy
    }
}

fn feature_vars(idx: &[usize]) -> Vec<Var> {
    idx.iter().map(|&j| Var::Feature(j)).collect()
}

/// `R(X_k, Z, Y) = I(X_k; Z) - I(X_k; Z | Y)` on the joint encoding of `Z`.
pub fn total_redundancy(ctx: &EstimatorContext, k: usize, z: &[usize]) -> Result<f64> {
    check_candidate(ctx, k, z)?;
    if z.is_empty() {
        return Err(Error::EmptySelected);
    }
    let xk = [Var::Feature(k)];
    let zv = feature_vars(z);
    Ok(ctx.mutual_information(&xk, &zv)?
        - ctx.conditional_mutual_information(&xk, &zv, &[Var::Target])?)
}

/// Grows the representative set of candidate `k` inside `selected`.
pub fn greedy_representative_set(
    ctx: &EstimatorContext,
    k: usize,
    selected: &[usize],
    params: &HocmimParams,
) -> Result<RedundancyTrace> {
    check_candidate(ctx, k, selected)?;
    if selected.is_empty() {
        return Err(Error::EmptySelected);
    }
    params.validate()?;
    let rel = relevance(ctx, k)?;
    greedy_search(ctx, k, rel, selected, params)
}

pub(crate) fn greedy_search(
    ctx: &EstimatorContext,
    k: usize,
    rel: f64,
    selected: &[usize],
    params: &HocmimParams,
) -> Result<RedundancyTrace> {
    let mut pool: Vec<usize> = selected.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let limit = params.order_limit();
    let adaptive = params.mode == OrderMode::Adaptive;
    let xk = [Var::Feature(k)];

    let mut chosen: Vec<usize> = Vec::new();
    let mut increments = Vec::new();
    let mut redundancy = 0.0;
    let mut cond: Vec<Var> = Vec::new();
    let mut cond_y: Vec<Var> = vec![Var::Target];

    let stop_reason = loop {
        let mut best: Option<(f64, usize)> = None;
        for (pos, &z) in pool.iter().enumerate() {
            let zv = [Var::Feature(z)];
            let delta = ctx.conditional_mutual_information(&xk, &zv, &cond)?
                - ctx.conditional_mutual_information(&xk, &zv, &cond_y)?;
            if best.is_none_or(|(b, _)| delta > b) {
                best = Some((delta, pos));
            }
        }
        let (delta, pos) = best.expect("pool is nonempty inside the loop");
        let z = pool.remove(pos);
        chosen.push(z);
        increments.push(delta);
        redundancy += delta;
        cond.push(Var::Feature(z));
        cond_y.push(Var::Feature(z));

        if adaptive && rel > ZERO_RELEVANCE && 1.0 - redundancy / rel < params.epsilon_star {
            break StopReason::Threshold;
        }
        if pool.is_empty() {
            break StopReason::SExhausted;
        }
        if chosen.len() >= limit {
            break StopReason::NMax;
        }
    };

    Ok(RedundancyTrace {
        candidate: k,
        relevance: rel,
        representatives: chosen,
        increments,
        redundancy,
        stop_reason,
    })
}

/// HOCMIM score `I(X_k; Y) - R_m` with its trace. An empty selected set gives
/// the plain relevance and an empty trace.
pub fn hocmim_score(
    ctx: &EstimatorContext,
    k: usize,
    selected: &[usize],
    params: &HocmimParams,
) -> Result<(f64, RedundancyTrace)> {
    check_candidate(ctx, k, selected)?;
    params.validate()?;
    let rel = relevance(ctx, k)?;
    if selected.is_empty() {
        let trace = RedundancyTrace {
            candidate: k,
            relevance: rel,
            representatives: Vec::new(),
            increments: Vec::new(),
            redundancy: 0.0,
            stop_reason: StopReason::SExhausted,
        };
        return Ok((rel, trace));
    }
    let trace = greedy_search(ctx, k, rel, selected, params)?;
    Ok((trace.score(), trace))
}

fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

/// `I(X_k; Y) - max R(X_k, Z, Y)` over every size-`n` subset `Z` of `selected`.
pub fn hocmim_score_exhaustive(
    ctx: &EstimatorContext,
    k: usize,
    selected: &[usize],
    n: usize,
) -> Result<f64> {
    check_candidate(ctx, k, selected)?;
    if n == 0 || n > selected.len() {
        return Err(Error::InvalidParam(format!(
            "order {n} outside 1..={}",
            selected.len()
        )));
    }
    let count = binomial(selected.len(), n);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::CombinatorialGuard {
            pool: selected.len(),
            order: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut pool = selected.to_vec();
    pool.sort_unstable();
    let rel = relevance(ctx, k)?;
    let mut best = f64::NEG_INFINITY;
    for_each_subset(&pool, n, |z| {
        best = best.max(total_redundancy(ctx, k, z)?);
        Ok(())
    })?;
    Ok(rel - best)
}

/// Forward selection with the HOCMIM score.
pub fn run_hocmim(ctx: &EstimatorContext, k: usize, params: &HocmimParams) -> Result<SelectionResult> {
    run_hocmim_traced(ctx, k, params).map(|(r, _)| r)
}

/// Like [`run_hocmim`], also returning every candidate's trace per step
/// (step 1 has none).
pub fn run_hocmim_traced(
    ctx: &EstimatorContext,
    k: usize,
    params: &HocmimParams,
) -> Result<(SelectionResult, Vec<Vec<RedundancyTrace>>)> {
    params.validate()?;
    let d = ctx.n_features();
    check_k(k, d)?;
    let started = Instant::now();

    let mut result = SelectionResult::new(
        crate::Criterion::hocmim(*params)?.label(),
        ctx.dataset().feature_names().to_vec(),
    );
    let mut redundancy_calls = Vec::with_capacity(k);
    let mut all_traces = Vec::with_capacity(k);

    let before = ctx.calls();
    let rel: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|j| relevance(ctx, j))
        .collect::<Result<_>>()?;
    let first = argmax_lowest(&rel);
    result.push_step(first, rel[first], ctx.calls() - before, None);
    redundancy_calls.push(0);
    all_traces.push(Vec::new());

    let mut selected = vec![first];
    while selected.len() < k {
        let candidates: Vec<usize> = (0..d).filter(|j| !selected.contains(j)).collect();
        let start = ctx.calls();
        let rel: Vec<f64> = candidates
            .par_iter()
            .map(|&j| relevance(ctx, j))
            .collect::<Result<_>>()?;
        let mid = ctx.calls();
        let traces: Vec<RedundancyTrace> = candidates
            .par_iter()
            .zip(&rel)
            .map(|(&j, &r)| greedy_search(ctx, j, r, &selected, params))
            .collect::<Result<_>>()?;
        let end = ctx.calls();

        let scores: Vec<f64> = traces.iter().map(RedundancyTrace::score).collect();
        let best = argmax_lowest(&scores);
        selected.push(candidates[best]);
        result.push_step(candidates[best], scores[best], end - start, Some(traces[best].clone()));
        redundancy_calls.push(end - mid);
        all_traces.push(traces);
    }
    result.step_redundancy_calls = Some(redundancy_calls);
    result.wall_time_secs = started.elapsed().as_secs_f64();
    Ok((result, all_traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::score_cmim;
    use crate::dataset::DiscreteDataset;
    use crate::synth::toy_dataset;

    const X1: usize = 0;
    const X2: usize = 1;
    const X3: usize = 2;
    const X4: usize = 3;
    const X5: usize = 4;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 0.005
    }

    fn with_copy_of(ds: &DiscreteDataset, j: usize) -> DiscreteDataset {
        let mut cols: Vec<Vec<u32>> = (0..ds.n_features()).map(|i| ds.feature(i).to_vec()).collect();
        cols.push(ds.feature(j).to_vec());
        DiscreteDataset::from_columns(cols, ds.target().to_vec()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(HocmimParams::default().validate().is_ok());
        let mut p = HocmimParams { epsilon_star: 1.5, ..Default::default() };
        assert!(p.validate().is_err());
        p = HocmimParams { mode: OrderMode::Fixed(16), ..Default::default() };
        assert!(p.validate().is_err());
        p = HocmimParams { mode: OrderMode::Fixed(0), ..Default::default() };
        assert!(p.validate().is_err());
        p = HocmimParams { n_max: 0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn toy_total_redundancy() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        assert!(close(total_redundancy(&ctx, X2, &[X3]).unwrap(), -0.14));
        // 0.1054 is printed as 0.10 in the worked example, just outside the tolerance
        let r5 = total_redundancy(&ctx, X5, &[X3]).unwrap();
        assert!((r5 - (0.17095059445466876 - 0.06550220320535938)).abs() < 1e-9, "{r5}");
        assert!(close(total_redundancy(&ctx, X1, &[X3]).unwrap(), -0.11));
        assert!(close(total_redundancy(&ctx, X4, &[X3]).unwrap(), -0.11));
        assert!(matches!(total_redundancy(&ctx, X2, &[X2]), Err(Error::CandidateSelected(_))));
    }

    #[test]
    fn redundancy_with_copy_equals_relevance() {
        let ds = with_copy_of(&toy_dataset(), X5);
        let ctx = EstimatorContext::plugin(&ds);
        let r = total_redundancy(&ctx, X5, &[X3, 5]).unwrap();
        assert!((r - relevance(&ctx, X5).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn toy_greedy_order_two() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let t = greedy_representative_set(&ctx, X4, &[X2, X3], &HocmimParams::fixed(2)).unwrap();
        let mut z = t.representatives.clone();
        z.sort_unstable();
        assert_eq!(z, vec![X2, X3]);
        assert!(close(t.redundancy, -0.24), "{}", t.redundancy);
        assert_eq!(t.stop_reason, StopReason::SExhausted);
        // first pick is the larger single increment, X3 (-0.11 vs -0.23)
        assert_eq!(t.representatives[0], X3);
        assert!(matches!(
            greedy_representative_set(&ctx, X4, &[], &HocmimParams::fixed(2)),
            Err(Error::EmptySelected)
        ));
    }

    #[test]
    fn copy_stops_on_threshold() {
        let ds = with_copy_of(&toy_dataset(), X3);
        let ctx = EstimatorContext::plugin(&ds);
        let t = greedy_representative_set(&ctx, X3, &[5], &HocmimParams::default()).unwrap();
        assert_eq!(t.order(), 1);
        assert_eq!(t.stop_reason, StopReason::Threshold);
        assert!((t.redundancy - t.relevance).abs() < 1e-9);

        let t = greedy_representative_set(&ctx, X3, &[X1, X2, X4, 5], &HocmimParams::default()).unwrap();
        assert_eq!(t.stop_reason, StopReason::Threshold);
        assert_eq!(t.representatives, vec![5]);
        let (s, _) = hocmim_score(&ctx, X3, &[X1, X2, X4, 5], &HocmimParams::default()).unwrap();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn toy_scores() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let (s, _) = hocmim_score(&ctx, X4, &[X2, X3], &HocmimParams::fixed(2)).unwrap();
        assert!(close(s, 0.25), "{s}");
        let (s, t) = hocmim_score(&ctx, X1, &[X2, X3, X4], &HocmimParams::fixed(2)).unwrap();
        assert!(close(s, 0.09), "{s}");
        assert_eq!(t.representatives, vec![X2, X4]);
        assert_eq!(t.stop_reason, StopReason::NMax);
        let (s, t) = hocmim_score(&ctx, X2, &[], &HocmimParams::default()).unwrap();
        assert!((s - relevance(&ctx, X2).unwrap()).abs() < 1e-12);
        assert!(t.representatives.is_empty());
        assert!(hocmim_score(&ctx, X2, &[X2], &HocmimParams::default()).is_err());
    }

    #[test]
    fn exhaustive_reductions() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let s = &[X2, X3, X4];
        let one = hocmim_score_exhaustive(&ctx, X1, s, 1).unwrap();
        assert!((one - score_cmim(&ctx, X1, s).unwrap()).abs() < 1e-9);
        let all = hocmim_score_exhaustive(&ctx, X1, s, 3).unwrap();
        let exact = ctx
            .cmi_entropy_form(&[Var::Feature(X1)], &[Var::Target], &feature_vars(s))
            .unwrap();
        assert!((all - exact).abs() < 1e-9);
        assert!(hocmim_score_exhaustive(&ctx, X1, s, 4).is_err());
    }

    #[test]
    fn exhaustive_guard_trips() {
        let n = 60;
        let cols = (0..n).map(|j| (0..4).map(|i| ((i + j) % 2) as u32).collect()).collect();
        let ds = DiscreteDataset::from_columns(cols, vec![0, 1, 0, 1]).unwrap();
        let ctx = EstimatorContext::plugin(&ds);
        let s: Vec<usize> = (1..n).collect();
        let err = hocmim_score_exhaustive(&ctx, 0, &s, 10).unwrap_err();
        assert!(matches!(err, Error::CombinatorialGuard { .. }));
    }

    #[test]
    fn toy_rankings() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let expect = [
            (1, vec![X3, X2, X4, X5, X1]),
            (2, vec![X3, X2, X4, X1, X5]),
            (3, vec![X3, X2, X4, X1, X5]),
        ];
        for (n, order) in expect {
            let r = run_hocmim(&ctx, 5, &HocmimParams::fixed(n)).unwrap();
            assert_eq!(r.order, order, "n={n}");
            assert_eq!(r.total_mi_calls, r.step_mi_calls.iter().sum::<u64>());
        }
    }

    #[test]
    fn run_rejects_bad_k() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        assert!(matches!(run_hocmim(&ctx, 0, &HocmimParams::default()), Err(Error::KOutOfRange { .. })));
        assert!(matches!(run_hocmim(&ctx, 6, &HocmimParams::default()), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn traced_run_is_deterministic() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let (a, ta) = run_hocmim_traced(&ctx, 5, &HocmimParams::default()).unwrap();
        let (b, tb) = run_hocmim_traced(&ctx, 5, &HocmimParams::default()).unwrap();
        assert_eq!(a.order, b.order);
        assert_eq!(a.scores, b.scores);
        assert_eq!(ta, tb);
        assert_eq!(ta.len(), 5);
        assert_eq!(ta[1].len(), 4);
        for t in ta.iter().flatten() {
            let sum: f64 = t.increments.iter().sum();
            assert!((sum - t.redundancy).abs() < 1e-9);
        }
    }
}
