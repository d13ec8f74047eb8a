use anyhow::Context;
use hocmim_core::synth::XorSpec;
use hocmim_core::{
    benchmark, make_splits, xor_recovery, CriterionRanker, DataSource, EvalReport, FeatureRanker,
    KnnConfig, SplitSpec,
};
use serde_json::json;

use super::{load_input, write_out, Input};
use crate::args::{BenchmarkArgs, Format};
use crate::UsageError;

pub fn run(args: &BenchmarkArgs) -> anyhow::Result<i32> {
    if args.threads == 0 {
        return execute(args);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .context("thread pool")?;
    pool.install(|| execute(args))
}

struct Recovery {
    label: String,
    hits: usize,
    total: usize,
}

fn execute(args: &BenchmarkArgs) -> anyhow::Result<i32> {
    let criteria = args.criterion.build()?;
    if criteria.len() < 2 {
        return Err(UsageError("benchmark compares at least two criteria".into()).into());
    }
    let rankers: Vec<CriterionRanker> = criteria
        .iter()
        .map(|&criterion| CriterionRanker {
            criterion,
            estimator: args.criterion.estimator,
        })
        .collect();
    let refs: Vec<&dyn FeatureRanker> = rankers.iter().map(|r| r as &dyn FeatureRanker).collect();

    let input = load_input(&args.data, args.seed)?;
    let source = match &input {
        Input::Table(table) => DataSource::Raw {
            table,
            n_bins: args.data.bins as usize,
            global: args.data.global_binning,
        },
        Input::Discrete(ds) => DataSource::Discrete(ds),
    };
    let k_max = args.k.unwrap_or(source.n_features().min(10));
    let spec = SplitSpec {
        train_fraction: args.train_fraction,
        seed: args.seed,
        n_repeats: args.repeats as usize,
    };
    let splits = make_splits(source.n_rows(), &spec).context("split")?;
    let knn = KnnConfig {
        k: args.knn_k as usize,
        representation: args.knn_repr.into(),
    };
    let report = benchmark(&source, &refs, &splits, k_max, &knn).context("benchmark")?;

    let recovery = if args.data.synthetic_xor {
        let xor = XorSpec {
            n_rows: args.data.xor_rows,
            ..XorSpec::default()
        };
        let seeds = args.seed..args.seed + args.repeats;
        let mut out = Vec::new();
        for r in &rankers {
            out.push(Recovery {
                label: r.label(),
                hits: xor_recovery(r, &xor, seeds.clone()).context("benchmark")?,
                total: args.repeats as usize,
            });
        }
        Some(out)
    } else {
        None
    };

    let body = render(&report, recovery.as_deref(), args.output.format)?;
    match &args.output.out {
        Some(path) => {
            write_out(path, &body)?;
            print!("{}", render(&report, recovery.as_deref(), Format::Text)?);
        }
        None => print!("{body}"),
    }
    Ok(0)
}

fn render(report: &EvalReport, recovery: Option<&[Recovery]>, format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Json => {
            let mut value = serde_json::to_value(report)?;
            if let Some(rec) = recovery {
                value["xor_recovery"] = rec
                    .iter()
                    .map(|r| json!({ "criterion": r.label, "hits": r.hits, "seeds": r.total }))
                    .collect();
            }
            serde_json::to_string_pretty(&value)? + "\n"
        }
        Format::Csv => report.to_csv(),
        Format::Text => {
            let mut s = report.to_text();
            for r in recovery.unwrap_or_default() {
                s.push_str(&format!(
                    "xor top-4 recovery {}: {}/{}\n",
                    r.label, r.hits, r.total
                ));
            }
            s
        }
    })
}
