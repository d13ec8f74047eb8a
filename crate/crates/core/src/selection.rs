//! Sequential forward selection and call-count bookkeeping.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{relevance, Criterion, CriterionKind, Scorer};
use crate::error::{Error, Result};
use crate::estimators::EstimatorContext;
use crate::hocmim::{run_hocmim, RedundancyTrace};

/// Output of one forward-selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub criterion: String,
    /// Selected feature indices in selection order.
    pub order: Vec<usize>,
    pub names: Vec<String>,
    /// Score of the winning candidate at each step.
    pub scores: Vec<f64>,
    pub step_mi_calls: Vec<u64>,
    pub total_mi_calls: u64,
    /// HOCMIM only: the part of each step spent on representative-set search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_redundancy_calls: Option<Vec<u64>>,
    /// HOCMIM only: the winner's representative-set trace at each step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub step_traces: Vec<Option<RedundancyTrace>>,
    pub wall_time_secs: f64,
    #[serde(skip)]
    all_names: Vec<String>,
}

impl SelectionResult {
    pub(crate) fn new(criterion: String, all_names: Vec<String>) -> Self {
        Self {
            criterion,
            order: Vec::new(),
            names: Vec::new(),
            scores: Vec::new(),
            step_mi_calls: Vec::new(),
            total_mi_calls: 0,
            step_redundancy_calls: None,
            step_traces: Vec::new(),
            wall_time_secs: 0.0,
            all_names,
        }
    }

    pub(crate) fn push_step(
        &mut self,
        feature: usize,
        score: f64,
        calls: u64,
        trace: Option<RedundancyTrace>,
    ) {
        self.order.push(feature);
        self.names.push(self.all_names[feature].clone());
        self.scores.push(score);
        self.step_mi_calls.push(calls);
        self.total_mi_calls += calls;
        let hocmim = trace.is_some() || !self.step_traces.is_empty();
        if hocmim {
            if self.step_traces.len() < self.order.len() - 1 {
                self.step_traces.resize(self.order.len() - 1, None);
            }
            self.step_traces.push(trace);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `rank,feature` lines, rank starting at 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,feature\n");
        for (i, name) in self.names.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, name);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("criterion: {}\n", self.criterion);
        let _ = writeln!(out, "{:>4}  {:<16} {:>10} {:>10}", "rank", "feature", "score", "mi_calls");
        for i in 0..self.order.len() {
            let _ = writeln!(
                out,
                "{:>4}  {:<16} {:>10.4} {:>10}",
                i + 1,
                self.names[i],
                self.scores[i],
                self.step_mi_calls[i]
            );
        }
        let _ = writeln!(out, "total mi calls: {}", self.total_mi_calls);
        out
    }
}

pub(crate) fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::KOutOfRange { k, d });
    }
    Ok(())
}

/// Index of the largest value, the first one on ties.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Selects `k` features with `criterion`. HOCMIM uses its two-phase search.
pub fn run_sfs(ctx: &EstimatorContext, criterion: &Criterion, k: usize) -> Result<SelectionResult> {
    if criterion.kind == CriterionKind::Hocmim {
        return run_hocmim(ctx, k, &criterion.hocmim);
    }
    run_sfs_with(ctx, criterion, k)
}

/// Forward selection with any scorer. The first feature is the one with the
/// largest relevance; each later step takes the best-scoring candidate.
pub fn run_sfs_with<S: Scorer + ?Sized>(
    ctx: &EstimatorContext,
    scorer: &S,
    k: usize,
) -> Result<SelectionResult> {
    let d = ctx.n_features();
    check_k(k, d)?;
    let started = Instant::now();
    let mut result = SelectionResult::new(scorer.label(), ctx.dataset().feature_names().to_vec());

    let before = ctx.calls();
    let rel: Vec<f64> = (0..d)
        .into_par_iter()
        .map(|j| relevance(ctx, j))
        .collect::<Result<_>>()?;
    let first = argmax_lowest(&rel);
    result.push_step(first, rel[first], ctx.calls() - before, None);

    let mut selected = vec![first];
    while selected.len() < k {
        let candidates: Vec<usize> = (0..d).filter(|j| !selected.contains(j)).collect();
        let before = ctx.calls();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|&j| scorer.score(ctx, j, &selected))
            .collect::<Result<_>>()?;
        let best = argmax_lowest(&scores);
        selected.push(candidates[best]);
        result.push_step(candidates[best], scores[best], ctx.calls() - before, None);
    }
    result.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(result)
}

/// Mutual-information evaluations split into relevance terms `I(X_k; Y)` and
/// everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MiCallCount {
    pub relevance: u64,
    pub redundancy: u64,
}

impl MiCallCount {
    pub fn total(&self) -> u64 {
        self.relevance + self.redundancy
    }
}

fn choose(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Per-candidate cost `(relevance, other)` with `s` features already selected.
fn candidate_cost(criterion: &Criterion, s: u64) -> (u64, u64) {
    let jmi = (1, 3 * s);
    match criterion.kind {
        CriterionKind::Mim => (1, 0),
        CriterionKind::Mifs => (1, if criterion.beta != 0.0 { s } else { 0 }),
        CriterionKind::Mrmr => (1, s),
        CriterionKind::Generic => {
            let b = if criterion.beta != 0.0 { s } else { 0 };
            let g = if criterion.gamma != 0.0 { 2 * s } else { 0 };
            (1, b + g)
        }
        CriterionKind::Jmi => jmi,
        CriterionKind::Disr => (0, s),
        CriterionKind::Cmim => (0, 2 * s),
        CriterionKind::RelaxMrmr => {
            let extra = if s >= 2 { 2 * s * (s - 1) } else { 0 };
            (1, 3 * s + extra)
        }
        CriterionKind::Jmi3 => match s {
            1 => jmi,
            _ => (0, choose(s, 2)),
        },
        CriterionKind::Jmi4 => match s {
            1 => jmi,
            2 => (0, 1),
            _ => (0, choose(s, 3)),
        },
        CriterionKind::Cmim3 => match s {
            1 => (0, 2),
            _ => (0, 2 * choose(s, 2)),
        },
        CriterionKind::Cmim4 => match s {
            1 | 2 => (0, 2),
            _ => (0, 2 * choose(s, 3)),
        },
        CriterionKind::Hocmim => {
            let n = criterion.hocmim.order_limit() as u64;
            let m = n.min(s);
            let search: u64 = (1..=m).map(|j| 4 * (s - j + 1)).sum();
            (1, search)
        }
    }
}

/// Exact number of MI evaluations [`run_sfs`] makes when selecting `k` of `d`
/// features. For adaptive HOCMIM this is the cost when no search stops before
/// `n_max`, an upper bound on the real count.
pub fn predicted_mi_calls(criterion: &Criterion, k: usize, d: usize) -> Result<MiCallCount> {
    check_k(k, d)?;
    let mut total = MiCallCount { relevance: d as u64, redundancy: 0 };
    for s in 1..k as u64 {
        let candidates = d as u64 - s;
        let (r, o) = candidate_cost(criterion, s);
        total.relevance += candidates * r;
        total.redundancy += candidates * o;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hocmim::HocmimParams;
    use crate::synth::{random_dataset, toy_dataset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Scaled(Criterion, f64);

    impl Scorer for Scaled {
        fn score(&self, ctx: &EstimatorContext, k: usize, s: &[usize]) -> Result<f64> {
            Ok(self.1 * self.0.score(ctx, k, s)?)
        }
        fn label(&self) -> String {
            format!("scaled-{}", self.0.label())
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_lowest(&[0.1, 0.3, 0.3, 0.2]), 1);
        assert_eq!(argmax_lowest(&[0.5]), 0);
    }

    #[test]
    fn toy_mim_order_and_outputs() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let r = run_sfs(&ctx, &Criterion::new(CriterionKind::Mim), 5).unwrap();
        // X1 and X4 tie on relevance; the lower index wins
        assert_eq!(r.order, vec![2, 4, 1, 0, 3]);
        assert_eq!(r.names, vec!["X3", "X5", "X2", "X1", "X4"]);
        assert_eq!(r.to_csv().lines().nth(1), Some("1,X3"));
        assert!(r.step_redundancy_calls.is_none());
        let back: SelectionResult = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.order, r.order);
        assert!(r.to_text().contains("X5"));
    }

    #[test]
    fn k_out_of_range() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let c = Criterion::new(CriterionKind::Jmi);
        assert!(matches!(run_sfs(&ctx, &c, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(run_sfs(&ctx, &c, 6), Err(Error::KOutOfRange { .. })));
        assert!(predicted_mi_calls(&c, 6, 5).is_err());
    }

    #[test]
    fn custom_scorer_plugs_in() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let base = Criterion::new(CriterionKind::Cmim);
        let a = run_sfs(&ctx, &base, 4).unwrap();
        let b = run_sfs_with(&ctx, &Scaled(base, 2.0), 4).unwrap();
        assert_eq!(a.order, b.order);
        assert_eq!(b.criterion, "scaled-cmim");
        assert_eq!(a.total_mi_calls, b.total_mi_calls);
    }

    #[test]
    fn hocmim_toy_count() {
        let ds = toy_dataset();
        let ctx = EstimatorContext::plugin(&ds);
        let c = Criterion::hocmim(HocmimParams::fixed(1)).unwrap();
        let r = run_sfs(&ctx, &c, 5).unwrap();
        assert_eq!(r.total_mi_calls, 95);
        assert_eq!(predicted_mi_calls(&c, 5, 5).unwrap().total(), 95);
        let red = r.step_redundancy_calls.as_ref().unwrap();
        assert_eq!(red, &vec![0, 16, 24, 24, 16]);
        assert_eq!(r.step_traces.len(), 5);
        assert!(r.step_traces[0].is_none());
    }

    #[test]
    fn predicted_matches_instrumented_for_every_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ds = random_dataset(&mut rng, 9, 80, &[2, 3, 2, 4, 2, 3, 2, 2, 3], 3);
        let ctx = EstimatorContext::plugin(&ds);
        let mut criteria: Vec<Criterion> = CriterionKind::ALL
            .iter()
            .filter(|&&k| k != CriterionKind::Hocmim)
            .map(|&k| Criterion::new(k))
            .collect();
        criteria.push(Criterion::new(CriterionKind::Mifs).with_beta(0.0).unwrap());
        criteria.push(
            Criterion::new(CriterionKind::Generic)
                .with_beta(0.3)
                .unwrap()
                .with_gamma(0.7)
                .unwrap(),
        );
        for n in 1..=4 {
            criteria.push(Criterion::hocmim(HocmimParams::fixed(n)).unwrap());
        }
        for c in &criteria {
            for k in [1, 2, 5, 9] {
                ctx.reset_and_read_counter();
                let r = run_sfs(&ctx, c, k).unwrap();
                let p = predicted_mi_calls(c, k, 9).unwrap();
                assert_eq!(r.total_mi_calls, p.total(), "{} k={k}", c.label());
                assert_eq!(ctx.calls(), p.total());
            }
        }
    }

    #[test]
    fn adaptive_count_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = random_dataset(&mut rng, 8, 60, &[2; 8], 2);
        let ctx = EstimatorContext::plugin(&ds);
        let c = Criterion::hocmim(HocmimParams::default()).unwrap();
        let r = run_sfs(&ctx, &c, 8).unwrap();
        assert!(r.total_mi_calls <= predicted_mi_calls(&c, 8, 8).unwrap().total());
    }

    #[test]
    fn doubling_order_counts_on_ten_features() {
        let count = |n| {
            predicted_mi_calls(&Criterion::hocmim(HocmimParams::fixed(n)).unwrap(), 5, 10)
                .unwrap()
                .redundancy
        };
        assert_eq!(count(1), 280);
        assert_eq!(count(2), 440);
        assert_eq!(count(4), 540);
    }
}
