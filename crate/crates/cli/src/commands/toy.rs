use std::fmt::Write as _;

use hocmim_core::hocmim::{greedy_representative_set, hocmim_score, run_hocmim};
use hocmim_core::synth::toy_dataset;
use hocmim_core::{EstimatorContext, HocmimParams, Var};
use serde_json::json;

use crate::args::{Format, ToyArgs};

/// Two-decimal values printed in the worked example are checked to this.
pub const TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// The printed value contradicts the rest of the worked example; shown
    /// for reference only.
    NotAsserted,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotAsserted => "--",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankRow {
    pub n: usize,
    pub computed: Vec<String>,
    pub expected: Vec<String>,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct ValueRow {
    pub quantity: String,
    pub computed: f64,
    pub expected: f64,
    /// Representative set, when the quantity has one.
    pub computed_set: Option<Vec<String>>,
    pub expected_set: Option<Vec<String>>,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct ToyReport {
    pub ranks: Vec<RankRow>,
    pub values: Vec<ValueRow>,
}

impl ToyReport {
    pub fn failures(&self) -> usize {
        self.ranks.iter().filter(|r| r.status == Status::Fail).count()
            + self.values.iter().filter(|v| v.status == Status::Fail).count()
    }

    pub fn value(&self, quantity: &str) -> Option<&ValueRow> {
        self.values.iter().find(|v| v.quantity == quantity)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.ranks {
            let _ = writeln!(
                out,
                "rank n={}  computed {:<16} expected {:<16} {}",
                r.n,
                r.computed.join(","),
                r.expected.join(","),
                r.status.as_str()
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<28} {:>9} {:>9} {:<12} {:<12} status",
            "quantity", "computed", "expected", "Z", "expected Z"
        );
        for v in &self.values {
            let set = |s: &Option<Vec<String>>| s.as_ref().map_or(String::new(), |z| format!("{{{}}}", z.join(",")));
            let _ = writeln!(
                out,
                "{:<28} {:>9.4} {:>9.3} {:<12} {:<12} {}",
                v.quantity,
                v.computed,
                v.expected,
                set(&v.computed_set),
                set(&v.expected_set),
                v.status.as_str()
            );
        }
        let _ = writeln!(out, "failures: {}", self.failures());
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ranks: Vec<_> = self
            .ranks
            .iter()
            .map(|r| json!({ "n": r.n, "computed": r.computed, "expected": r.expected, "status": r.status.as_str() }))
            .collect();
        let values: Vec<_> = self
            .values
            .iter()
            .map(|v| {
                json!({
                    "quantity": v.quantity,
                    "computed": v.computed,
                    "expected": v.expected,
                    "computed_set": v.computed_set,
                    "expected_set": v.expected_set,
                    "status": v.status.as_str(),
                })
            })
            .collect();
        json!({ "ranks": ranks, "values": values, "failures": self.failures() })
    }
}

fn names(idx: &[usize]) -> Vec<String> {
    idx.iter().map(|j| format!("X{}", j + 1)).collect()
}

fn sorted_names(idx: &[usize]) -> Vec<String> {
    let mut idx = idx.to_vec();
    idx.sort_unstable();
    names(&idx)
}

struct Builder {
    rows: Vec<ValueRow>,
}

impl Builder {
    fn push(&mut self, quantity: String, computed: f64, expected: f64, sets: Option<(&[usize], &[usize])>, asserted: bool) {
        let (computed_set, expected_set) = match sets {
            Some((c, e)) => (Some(sorted_names(c)), Some(sorted_names(e))),
            None => (None, None),
        };
        let status = if !asserted {
            Status::NotAsserted
        } else if (computed - expected).abs() <= TOLERANCE && computed_set == expected_set {
            Status::Pass
        } else {
            Status::Fail
        };
        self.rows.push(ValueRow {
            quantity,
            computed,
            expected,
            computed_set,
            expected_set,
            status,
        });
    }
}

fn set_label(s: &[usize]) -> String {
    format!("{{{}}}", names(s).join(","))
}

/// Reruns the worked example and compares it with the printed tables.
pub fn toy_report() -> anyhow::Result<ToyReport> {
    const X1: usize = 0;
    const X2: usize = 1;
    const X3: usize = 2;
    const X4: usize = 3;
    const X5: usize = 4;

    let ds = toy_dataset();
    let ctx = EstimatorContext::plugin(&ds);

    let expected_ranks = [
        (1, vec![X3, X2, X4, X5, X1]),
        (2, vec![X3, X2, X4, X1, X5]),
        (3, vec![X3, X2, X4, X1, X5]),
    ];
    let mut ranks = Vec::new();
    for (n, expected) in expected_ranks {
        let got = run_hocmim(&ctx, 5, &HocmimParams::fixed(n))?.order;
        ranks.push(RankRow {
            n,
            status: if got == expected { Status::Pass } else { Status::Fail },
            computed: names(&got),
            expected: names(&expected),
        });
    }

    let mut b = Builder { rows: Vec::new() };
    let relevance = [0.01, 0.05, 0.26, 0.01, 0.17];
    for (k, &e) in relevance.iter().enumerate() {
        let v = ctx.mutual_information(&[Var::Feature(k)], &[Var::Target])?;
        b.push(format!("I(X{};Y)", k + 1), v, e, None, true);
    }

    // (candidate, selected set, order, printed R, printed Z, asserted)
    type Entry = (usize, &'static [usize], usize, f64, &'static [usize], bool);
    let tables: [Entry; 14] = [
        (X1, &[X3], 1, -0.11, &[X3], true),
        (X2, &[X3], 1, -0.14, &[X3], true),
        (X4, &[X3], 1, -0.11, &[X3], true),
        (X5, &[X3], 1, 0.10, &[X3], true),
        (X1, &[X2, X3], 1, -0.04, &[X2], true),
        (X4, &[X2, X3], 1, -0.11, &[X3], true),
        (X5, &[X2, X3], 1, 0.10, &[X3], true),
        (X1, &[X2, X3], 2, -0.11, &[X2, X3], false),
        (X4, &[X2, X3], 2, -0.24, &[X2, X3], true),
        (X5, &[X2, X3], 2, 0.12, &[X2, X3], true),
        (X1, &[X2, X3, X4], 1, -0.04, &[X2], true),
        (X5, &[X2, X3, X4], 1, 0.10, &[X3], true),
        (X1, &[X2, X3, X4], 2, -0.08, &[X2, X4], true),
        (X5, &[X2, X3, X4], 2, 0.12, &[X2, X3], true),
    ];
    for (k, s, n, e, z, asserted) in tables {
        let t = greedy_representative_set(&ctx, k, s, &HocmimParams::fixed(n))?;
        b.push(
            format!("R{n}(X{}; S={})", k + 1, set_label(s)),
            t.redundancy,
            e,
            Some((&t.representatives, z)),
            asserted,
        );
    }
    // n = 3 row of the fourth iteration: the printed values do not match any
    // subset of S, and the X1 set includes the candidate itself
    for (k, e) in [(X1, -0.26), (X5, 0.010)] {
        let s = [X2, X3, X4];
        let t = greedy_representative_set(&ctx, k, &s, &HocmimParams::fixed(3))?;
        b.push(format!("R3(X{}; S={})", k + 1, set_label(&s)), t.redundancy, e, None, false);
    }

    let scores: [(usize, &[usize], usize, f64); 7] = [
        (X2, &[X3], 1, 0.19),
        (X4, &[X2, X3], 1, 0.12),
        (X4, &[X2, X3], 2, 0.25),
        (X1, &[X2, X3, X4], 1, 0.05),
        (X1, &[X2, X3, X4], 2, 0.09),
        (X5, &[X2, X3, X4], 1, 0.07),
        (X5, &[X2, X3, X4], 2, 0.05),
    ];
    for (k, s, n, e) in scores {
        let (v, _) = hocmim_score(&ctx, k, s, &HocmimParams::fixed(n))?;
        b.push(format!("I{n}(X{};Y|S={})", k + 1, set_label(s)), v, e, None, true);
    }

    Ok(ToyReport { ranks, values: b.rows })
}

pub fn run(args: &ToyArgs) -> anyhow::Result<i32> {
    let report = toy_report()?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.to_json())?),
        Format::Csv => {
            println!("quantity,computed,expected,status");
            for v in &report.values {
                println!("\"{}\",{},{},{}", v.quantity, v.computed, v.expected, v.status.as_str());
            }
        }
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(i32::from(report.failures() > 0))
}
