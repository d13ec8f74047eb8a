use anyhow::Context;
use hocmim_core::hocmim::run_hocmim_traced;
use hocmim_core::{run_sfs, CriterionKind, EstimatorContext};

use super::{discretize_all, load_input, write_out, Input};
use crate::args::{Format, SelectArgs};
use crate::UsageError;

pub fn run(args: &SelectArgs) -> anyhow::Result<i32> {
    let criteria = args.criterion.build()?;
    let [criterion] = criteria[..] else {
        return Err(UsageError("select takes exactly one criterion".into()).into());
    };
    if args.traces.is_some() && criterion.kind != CriterionKind::Hocmim {
        return Err(UsageError("--traces needs the hocmim criterion".into()).into());
    }
    let data = match load_input(&args.data, args.seed)? {
        Input::Table(t) => discretize_all(&t, args.data.bins)?,
        Input::Discrete(d) => d,
    };
    let k = args.k.unwrap_or(data.n_features());
    let ctx = EstimatorContext::new(&data, args.criterion.estimator).context("selection")?;

    let result = if let Some(path) = &args.traces {
        let (result, traces) =
            run_hocmim_traced(&ctx, k, &criterion.hocmim).context("selection")?;
        write_out(path, &serde_json::to_string_pretty(&traces)?)?;
        result
    } else {
        run_sfs(&ctx, &criterion, k).context("selection")?
    };

    let body = match args.output.format {
        Format::Json => result.to_json().context("write")?,
        Format::Csv => result.to_csv(),
        Format::Text => result.to_text(),
    };
    match &args.output.out {
        Some(path) => {
            write_out(path, &body)?;
            print!("{}", result.to_text());
        }
        None => print!("{body}"),
    }
    Ok(0)
}
