pub mod benchmark;
pub mod oracle;
pub mod select;
pub mod toy;

use std::path::Path;

use anyhow::Context;
use hocmim_core::synth::{xor_dataset, XorSpec};
use hocmim_core::{apply_binning, fit_binning, load_csv_default_target, DiscreteDataset, RawTable};

use crate::args::DataArgs;
use crate::UsageError;

pub(crate) enum Input {
    Table(RawTable),
    Discrete(DiscreteDataset),
}

pub(crate) fn load_input(data: &DataArgs, seed: u64) -> anyhow::Result<Input> {
    if data.synthetic_xor {
        let spec = XorSpec {
            n_rows: data.xor_rows,
            ..XorSpec::default()
        };
        return Ok(Input::Discrete(xor_dataset(&spec, seed)));
    }
    let path = data
        .dataset
        .as_ref()
        .ok_or_else(|| UsageError("one of --dataset or --synthetic-xor is required".into()))?;
    let table = load_csv_default_target(path, data.target.as_deref())
        .context("load")?;
    Ok(Input::Table(table))
}

/// Discretizes a table with binning fit on every row.
pub(crate) fn discretize_all(table: &RawTable, bins: u32) -> anyhow::Result<DiscreteDataset> {
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    let spec = fit_binning(table, bins as usize, &rows).context("binning")?;
    apply_binning(table, &spec).context("binning")
}

pub(crate) fn write_out(path: &Path, body: &str) -> anyhow::Result<()> {
    std::fs::write(path, body).with_context(|| format!("write: {}", path.display()))
}
