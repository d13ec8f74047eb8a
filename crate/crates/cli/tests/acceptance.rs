//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hocmim_cli::{toy_report, Status};
use hocmim_core::estimators::features;
use hocmim_core::synth::{random_dataset, xor_dataset, XorSpec};
use hocmim_core::{
    average_ranks, predicted_mi_calls, run_oracle_suite, run_sfs, xor_recovery, Criterion,
    CriterionKind, CriterionRanker, EstimatorContext, HocmimParams, OracleConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        out.pass = false;
        out.detail.push_str(&format!("; over time limit {limit:?}"));
    }
    out.detail.push_str(&format!("; {:.2}s", elapsed.as_secs_f64()));
    out
}

fn golden_ranks() -> Outcome {
    let report = toy_report().expect("toy report");
    let bad: Vec<String> = report
        .ranks
        .iter()
        .filter(|r| r.status != Status::Pass)
        .map(|r| format!("n={} got {}", r.n, r.computed.join(",")))
        .collect();
    Outcome {
        pass: bad.is_empty() && report.ranks.len() == 3,
        detail: if bad.is_empty() {
            "n=1,2,3 orders match".into()
        } else {
            bad.join("; ")
        },
    }
}

fn golden_values() -> Outcome {
    let report = toy_report().expect("toy report");
    let asserted = report.values.iter().filter(|v| v.status != Status::NotAsserted).count();
    let failed: Vec<String> = report
        .values
        .iter()
        .filter(|v| v.status == Status::Fail)
        .map(|v| format!("{} = {:.4} vs {}", v.quantity, v.computed, v.expected))
        .collect();
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "{}/{asserted} within 0.005{}{}",
            asserted - failed.len(),
            if failed.is_empty() { "" } else { "; off: " },
            failed.join(", ")
        ),
    }
}

fn oracle_suite() -> Outcome {
    let report = run_oracle_suite(&OracleConfig::default()).expect("oracle suite");
    let required = [
        "greedy_full_order_is_cmi",
        "order_one_is_cmim",
        "exhaustive_two_is_cmim3",
        "exhaustive_three_is_cmim4",
        "cmi_forms_agree",
        "chain_rule",
        "mi_symmetry",
        "cmi_symmetry",
    ];
    let missing: Vec<&str> = required
        .iter()
        .copied()
        .filter(|n| report.get(n).is_none_or(|c| c.passed == 0))
        .collect();
    let checked: u64 = report.checks.iter().map(|c| c.passed + c.failed).sum();
    Outcome {
        pass: report.failures() == 0 && missing.is_empty(),
        detail: format!(
            "100 instances, {checked} comparisons, {} failures{}",
            report.failures(),
            if missing.is_empty() { String::new() } else { format!(", never exercised: {missing:?}") }
        ),
    }
}

fn redundancy_calls(ctx: &EstimatorContext, k: usize, n: usize) -> u64 {
    let c = Criterion::hocmim(HocmimParams::fixed(n)).unwrap();
    let r = run_sfs(ctx, &c, k).unwrap();
    r.step_redundancy_calls.unwrap().iter().sum()
}

fn complexity() -> Outcome {
    let mut mismatches = Vec::new();
    let mut grid = 0;
    let toy = hocmim_core::synth::toy_dataset();
    let toy_ctx = EstimatorContext::plugin(&toy);
    let toy_c = Criterion::hocmim(HocmimParams::fixed(1)).unwrap();
    let toy_count = run_sfs(&toy_ctx, &toy_c, 5).unwrap().total_mi_calls;
    if toy_count != predicted_mi_calls(&toy_c, 5, 5).unwrap().total() {
        mismatches.push(format!("toy: {toy_count}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [4, 7, 10] {
        let arities: Vec<u32> = (0..d).map(|_| rng.gen_range(2..=3)).collect();
        let ds = random_dataset(&mut rng, d, 60, &arities, 2);
        let ctx = EstimatorContext::plugin(&ds);
        for k in [1, 3, d] {
            for n in [1, 2, 3, 4] {
                let c = Criterion::hocmim(HocmimParams::fixed(n)).unwrap();
                let got = run_sfs(&ctx, &c, k).unwrap().total_mi_calls;
                let want = predicted_mi_calls(&c, k, d).unwrap().total();
                grid += 1;
                if got != want {
                    mismatches.push(format!("D={d} K={k} n={n}: {got} vs {want}"));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ds = random_dataset(&mut rng, 10, 60, &[2; 10], 2);
    let ctx = EstimatorContext::plugin(&ds);
    let (c1, c2, c4) = (
        redundancy_calls(&ctx, 5, 1),
        redundancy_calls(&ctx, 5, 2),
        redundancy_calls(&ctx, 5, 4),
    );
    // affine in n: the n=4 point lies on the line through n=1 and n=2
    let residual = c4 as i64 - (c2 as i64 + 2 * (c2 as i64 - c1 as i64));
    let affine = residual == 0;
    Outcome {
        pass: mismatches.is_empty() && affine,
        detail: format!(
            "exact count {}/{} (toy {toy_count}); redundancy calls K=5 D=10 n=1,2,4: {c1},{c2},{c4}, affine residual {residual}{}",
            grid + 1 - mismatches.len(),
            grid + 1,
            if mismatches.is_empty() { String::new() } else { format!("; mismatches {mismatches:?}") }
        ),
    }
}

fn xor_benchmark() -> Outcome {
    let spec = XorSpec::default();
    let hocmim = CriterionRanker::new(Criterion::hocmim(HocmimParams::default()).unwrap());
    let mim = CriterionRanker::new(Criterion::new(CriterionKind::Mim));
    let h = xor_recovery(&hocmim, &spec, 0..30).unwrap();
    let m = xor_recovery(&mim, &spec, 0..30).unwrap();
    // the generated data really is parity plus independent noise
    let ds = xor_dataset(&spec, 0);
    let ctx = EstimatorContext::plugin(&ds);
    let h_y = ctx.entropy(&[hocmim_core::Var::Target]).unwrap();
    let h_y_given = ctx
        .conditional_entropy(&[hocmim_core::Var::Target], &features(&[0, 1, 2, 3]))
        .unwrap();
    Outcome {
        pass: h * 10 >= 9 * 30 && m * 10 <= 3 * 30 && h_y_given < 1e-12 && h_y > 0.0,
        detail: format!("top-4 recovery over 30 seeds: hocmim {h}/30, mim {m}/30"),
    }
}

fn sha(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn determinism_and_ranks() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let toy = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/toy.csv");
    let toy = toy.to_str().unwrap();
    let configs: [&[&str]; 2] = [
        &["--dataset", toy, "--criterion", "mim,hocmim-n2", "--repeats", "5", "--seed", "7", "--k", "5"],
        &["--synthetic-xor", "--criterion", "mim,cmim,hocmim", "--repeats", "12", "--seed", "3", "--k", "6"],
    ];
    let mut identical = true;
    let mut runs = 0;
    for (c, config) in configs.iter().enumerate() {
        let mut hashes = Vec::new();
        for threads in ["1", "4", "0", "1"] {
            let out = dir.path().join(format!("report{c}-{runs}.json"));
            runs += 1;
            let status = Command::new(env!("CARGO_BIN_EXE_hocmim"))
                .arg("benchmark")
                .args(*config)
                .args(["--threads", threads, "--out"])
                .arg(&out)
                .output()
                .unwrap();
            if !status.status.success() {
                return Outcome {
                    pass: false,
                    detail: String::from_utf8_lossy(&status.stderr).into_owned(),
                };
            }
            hashes.push(sha(&out));
        }
        identical &= hashes.windows(2).all(|w| w[0] == w[1]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut rank_failures = 0;
    for _ in 0..500 {
        let m = rng.gen_range(2..12);
        let errors: Vec<f64> = (0..m).map(|_| f64::from(rng.gen_range(0..5u8)) / 5.0).collect();
        let ranks = average_ranks(&errors);
        let mf = m as f64;
        if (ranks.iter().sum::<f64>() - mf * (mf + 1.0) / 2.0).abs() > 1e-9 {
            rank_failures += 1;
        }
    }
    let examples = average_ranks(&[0.1, 0.1, 0.3]) == [1.5, 1.5, 3.0];
    Outcome {
        pass: identical && rank_failures == 0 && examples,
        detail: format!(
            "{runs} benchmark runs over 2 configs (threads 1,4,all,1) {}; rank-sum violations {rank_failures}/500",
            if identical { "bit-identical" } else { "differ" }
        ),
    }
}

type Check = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Check; 6] = [
        ("worked-example golden ranks", Duration::from_secs(1), golden_ranks),
        ("worked-example golden values", Duration::from_secs(1), golden_values),
        ("oracle equivalence suite", Duration::from_secs(60), oracle_suite),
        ("complexity accounting", Duration::from_secs(30), complexity),
        ("xor recovery benchmark", Duration::from_secs(300), xor_benchmark),
        ("evaluation determinism and rank rules", Duration::from_secs(60), determinism_and_ranks),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let out = timed(*limit, f);
        if !out.pass {
            failed += 1;
        }
        println!(
            "acceptance {} {name}: {} ({})",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
