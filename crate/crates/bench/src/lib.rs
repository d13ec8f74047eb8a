//! Fixtures shared by the selection benchmarks.

use hocmim_core::synth::{xor_dataset, XorSpec};
use hocmim_core::{Criterion, CriterionKind, DiscreteDataset, HocmimParams};

/// Parity target over four bits plus `n_noise` independent binary columns.
pub fn parity_fixture(n_rows: usize, n_noise: usize, seed: u64) -> DiscreteDataset {
    let spec = XorSpec {
        n_rows,
        n_noise,
        ..XorSpec::default()
    };
    xor_dataset(&spec, seed)
}

/// The criteria compared in the benchmarks, low order first.
pub fn benchmark_criteria() -> Vec<Criterion> {
    let mut out: Vec<Criterion> = [
        CriterionKind::Mim,
        CriterionKind::Mrmr,
        CriterionKind::Jmi,
        CriterionKind::Cmim,
        CriterionKind::Jmi3,
        CriterionKind::Cmim3,
    ]
    .into_iter()
    .map(Criterion::new)
    .collect();
    for n in [1, 2, 4] {
        out.push(Criterion::hocmim(HocmimParams::fixed(n)).expect("valid order"));
    }
    out.push(Criterion::hocmim(HocmimParams::default()).expect("default params"));
    out
}
