//! Brute-force cross-checks of the estimators and criteria on random small
//! datasets.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{relevance, score_cmim, score_cmim_high};
use crate::dataset::DiscreteDataset;
use crate::error::Result;
use crate::estimators::{features, EstimatorContext, Var};
use crate::hocmim::{
    greedy_representative_set, hocmim_score, hocmim_score_exhaustive, total_redundancy,
    HocmimParams,
};
use crate::synth::random_dataset;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_instances: usize,
    pub max_features: usize,
    pub max_rows: usize,
    pub max_arity: u32,
    pub seed: u64,
    /// Rows in the large-sample independence check.
    pub independence_rows: usize,
    pub independence_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_instances: 100,
            max_features: 6,
            max_rows: 64,
            max_arity: 3,
            seed: 0,
            independence_rows: 10_000,
            independence_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<CheckTally>,
}

impl OracleReport {
    pub fn failures(&self) -> u64 {
        self.checks.iter().map(|c| c.failed).sum()
    }

    pub fn get(&self, name: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.failed == 0 { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status} {:<28} passed {:>7} failed {:>5}", c.name, c.passed, c.failed);
            if let Some(f) = &c.first_failure {
                let _ = writeln!(out, "     first failure: {f}");
            }
        }
        let _ = writeln!(out, "total failures: {}", self.failures());
        out
    }
}

#[derive(Default)]
struct Tallies(Vec<CheckTally>);

impl Tallies {
    fn record(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let pos = match self.0.iter().position(|c| c.name == name) {
            Some(p) => p,
            None => {
                self.0.push(CheckTally {
                    name: name.to_string(),
                    passed: 0,
                    failed: 0,
                    first_failure: None,
                });
                self.0.len() - 1
            }
        };
        let tally = &mut self.0[pos];
        if ok {
            tally.passed += 1;
        } else {
            tally.failed += 1;
            if tally.first_failure.is_none() {
                tally.first_failure = Some(detail());
            }
        }
    }

    fn close(&mut self, name: &str, a: f64, b: f64, tol: f64, ctx: &str) {
        self.record(name, (a - b).abs() <= tol, || format!("{ctx}: {a} vs {b}"));
    }
}

fn random_instance(rng: &mut ChaCha8Rng, cfg: &OracleConfig) -> DiscreteDataset {
    let d = rng.gen_range(3..=cfg.max_features.max(3));
    let n = rng.gen_range(8..=cfg.max_rows.max(8));
    let arities: Vec<u32> = (0..d).map(|_| rng.gen_range(2..=cfg.max_arity.max(2))).collect();
    let classes = rng.gen_range(2..=cfg.max_arity.max(2));
    random_dataset(rng, d, n, &arities, classes)
}

fn subsets_without(d: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << d)
        .filter(move |m| m & (1 << k) == 0)
        .map(move |m| (0..d).filter(|&j| m & (1 << j) != 0).collect())
}

fn check_instance(ctx: &EstimatorContext, t: &mut Tallies, id: usize) -> Result<()> {
    let d = ctx.n_features();
    let y = [Var::Target];
    for k in 0..d {
        let xk = [Var::Feature(k)];
        for s in subsets_without(d, k) {
            let tag = format!("instance {id} k={k} S={s:?}");
            let sv = features(&s);
            let exact = ctx.cmi_entropy_form(&xk, &y, &sv)?;

            let (greedy, trace) = hocmim_score(ctx, k, &s, &HocmimParams::fixed(s.len()))?;
            t.close("greedy_full_order_is_cmi", greedy, exact, TOLERANCE, &tag);
            let sum: f64 = trace.increments.iter().sum();
            t.close("trace_chain_sum", sum, trace.redundancy, TOLERANCE, &tag);

            let (one, _) = hocmim_score(ctx, k, &s, &HocmimParams::fixed(1))?;
            t.close("order_one_is_cmim", one, score_cmim(ctx, k, &s)?, TOLERANCE, &tag);

            if s.len() >= 2 {
                let ex2 = hocmim_score_exhaustive(ctx, k, &s, 2)?;
                t.close("exhaustive_two_is_cmim3", ex2, score_cmim_high(ctx, k, &s, 3)?, TOLERANCE, &tag);
                let (g2, _) = hocmim_score(ctx, k, &s, &HocmimParams::fixed(2))?;
                t.record("exhaustive_not_above_greedy", ex2 <= g2 + TOLERANCE, || {
                    format!("{tag}: exhaustive {ex2} > greedy {g2}")
                });
            }
            if s.len() >= 3 {
                let ex3 = hocmim_score_exhaustive(ctx, k, &s, 3)?;
                t.close("exhaustive_three_is_cmim4", ex3, score_cmim_high(ctx, k, &s, 4)?, TOLERANCE, &tag);
            }

            let eq5 = ctx.conditional_mutual_information(&xk, &y, &sv)?;
            t.close("cmi_forms_agree", eq5, exact, TOLERANCE, &tag);

            let mut joint = sv.clone();
            joint.push(Var::Feature(k));
            let lhs = ctx.mutual_information(&joint, &y)?;
            let rhs = ctx.mutual_information(&sv, &y)? + eq5;
            t.close("chain_rule", lhs, rhs, TOLERANCE, &tag);
            let ab = ctx.mutual_information(&xk, &sv)?;
            let ba = ctx.mutual_information(&sv, &xk)?;
            t.close("mi_symmetry", ab, ba, TOLERANCE, &tag);
            let cab = ctx.conditional_mutual_information(&xk, &sv, &y)?;
            let cba = ctx.conditional_mutual_information(&sv, &xk, &y)?;
            t.close("cmi_symmetry", cab, cba, TOLERANCE, &tag);

            let r = total_redundancy(ctx, k, &s)?;
            let rel = relevance(ctx, k)?;
            t.record("redundancy_bounds", -cab - TOLERANCE <= r && r <= rel + TOLERANCE, || {
                format!("{tag}: R={r} outside [{}, {rel}]", -cab)
            });

            let adaptive = greedy_representative_set(ctx, k, &s, &HocmimParams::default())?;
            if adaptive.stop_reason == crate::hocmim::StopReason::Threshold {
                t.record("threshold_stop_bound", adaptive.redundancy <= rel + TOLERANCE, || {
                    format!("{tag}: R={} above I={rel}", adaptive.redundancy)
                });
            }
        }
    }
    Ok(())
}

fn with_duplicate(ds: &DiscreteDataset, j: usize) -> Result<DiscreteDataset> {
    let mut cols: Vec<Vec<u32>> = (0..ds.n_features()).map(|i| ds.feature(i).to_vec()).collect();
    cols.push(ds.feature(j).to_vec());
    let mut arities = ds.arities().to_vec();
    arities.push(ds.arity(j));
    let mut names = ds.feature_names().to_vec();
    names.push(format!("{}_copy", ds.feature_names()[j]));
    DiscreteDataset::new(
        names,
        cols,
        arities,
        ds.target_name().to_string(),
        ds.target().to_vec(),
        ds.n_classes(),
    )
}

/// A candidate whose exact copy is already selected scores zero.
fn check_duplicate(ds: &DiscreteDataset, t: &mut Tallies, id: usize) -> Result<()> {
    let d = ds.n_features();
    let k = id % d;
    let dup = with_duplicate(ds, k)?;
    let ctx = EstimatorContext::plugin(&dup);
    let s: Vec<usize> = (0..=d).filter(|&j| j != k).collect();
    let (score, _) = hocmim_score(&ctx, k, &s, &HocmimParams::default())?;
    t.record("duplicate_scores_zero", score.abs() <= TOLERANCE, || {
        format!("instance {id} k={k}: score {score}")
    });
    let r = total_redundancy(&ctx, k, &[d])?;
    t.close("duplicate_redundancy_is_relevance", r, relevance(&ctx, k)?, TOLERANCE, &format!("instance {id}"));
    Ok(())
}

/// With `X_k` independent of `S`, `I(X_k; Y | S)` reduces to
/// `I(X_k; Y) + I(X_k; S | Y)` up to sampling noise.
fn check_independence(cfg: &OracleConfig, t: &mut Tallies) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let n = cfg.independence_rows;
    let cols: Vec<Vec<u32>> = (0..3).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
    let target: Vec<u32> = (0..n)
        .map(|i| {
            let parity = cols[0][i] ^ cols[1][i];
            if rng.gen_bool(0.9) { parity } else { 1 - parity }
        })
        .collect();
    let ds = DiscreteDataset::from_columns(cols, target)?;
    let ctx = EstimatorContext::plugin(&ds);
    let (k, s) = (0, [1usize, 2]);
    let score = hocmim_score_exhaustive(&ctx, k, &s, s.len())?;
    let xk = [Var::Feature(k)];
    let expected = relevance(&ctx, k)?
        + ctx.conditional_mutual_information(&xk, &features(&s), &[Var::Target])?;
    t.close("independent_candidate", score, expected, cfg.independence_tolerance, "large sample");
    Ok(())
}

/// Runs every check on `cfg.n_instances` seeded random datasets.
pub fn run_oracle_suite(cfg: &OracleConfig) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tallies = Tallies::default();
    for id in 0..cfg.n_instances {
        let ds = random_instance(&mut rng, cfg);
        let ctx = EstimatorContext::plugin(&ds);
        check_instance(&ctx, &mut tallies, id)?;
        check_duplicate(&ds, &mut tallies, id)?;
    }
    check_independence(cfg, &mut tallies)?;
    Ok(OracleReport { checks: tallies.0 })
}
