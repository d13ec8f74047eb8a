//! Bundled and generated datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DiscreteDataset;

/// Ten-row xor toy table: `Y = (X1 ^ X2) ^ (X3 ^ X4)` with `X5` irrelevant.
pub const TOY_CSV: &str = include_str!("../data/toy.csv");

/// The toy table as a dataset (all features binary, two classes).
pub fn toy_dataset() -> DiscreteDataset {
    let rows: Vec<Vec<u32>> = TOY_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| c.trim().parse().unwrap()).collect())
        .collect();
    let features = (0..5).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let target = rows.iter().map(|r| r[5]).collect();
    DiscreteDataset::new(
        (1..=5).map(|j| format!("X{j}")).collect(),
        features,
        vec![2; 5],
        "Y".into(),
        target,
        2,
    )
    .expect("toy table is well formed")
}

/// Parameters of the parity benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XorSpec {
    pub n_rows: usize,
    pub n_noise: usize,
    /// P(X=1) for the four relevant bits.
    pub relevant_p: [f64; 4],
    pub noise_p: f64,
}

impl Default for XorSpec {
    fn default() -> Self {
        Self {
            n_rows: 512,
            n_noise: 6,
            relevant_p: [0.5, 0.2, 0.2, 0.2],
            noise_p: 0.5,
        }
    }
}

/// `Y = (X1 ^ X2) ^ (X3 ^ X4)` plus independent noise columns `X5..`.
///
/// With one balanced and three biased relevant bits, `X1` carries a marginal
/// signal while each further relevant bit is informative only given the ones
/// already chosen. With four balanced bits the parity is independent of every
/// subset of three or fewer features.
pub fn xor_dataset(spec: &XorSpec, seed: u64) -> DiscreteDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 4 + spec.n_noise;
    let mut features: Vec<Vec<u32>> = vec![Vec::with_capacity(spec.n_rows); d];
    let mut target = Vec::with_capacity(spec.n_rows);
    for _ in 0..spec.n_rows {
        let mut parity = 0;
        for (j, col) in features.iter_mut().enumerate() {
            let p = if j < 4 { spec.relevant_p[j] } else { spec.noise_p };
            let bit = u32::from(rng.gen_bool(p));
            if j < 4 {
                parity ^= bit;
            }
            col.push(bit);
        }
        target.push(parity);
    }
    DiscreteDataset::new(
        (1..=d).map(|j| format!("X{j}")).collect(),
        features,
        vec![2; d],
        "Y".into(),
        target,
        2,
    )
    .expect("generated columns are binary")
}

/// Uniform random codes with fixed arities, used by the cross-check suites.
pub fn random_dataset(
    rng: &mut impl Rng,
    n_features: usize,
    n_rows: usize,
    arities: &[u32],
    n_classes: u32,
) -> DiscreteDataset {
    let features = arities
        .iter()
        .take(n_features)
        .map(|&a| (0..n_rows).map(|_| rng.gen_range(0..a)).collect())
        .collect();
    let target = (0..n_rows).map(|_| rng.gen_range(0..n_classes)).collect();
    DiscreteDataset::new(
        (1..=n_features).map(|j| format!("X{j}")).collect(),
        features,
        arities[..n_features].to_vec(),
        "Y".into(),
        target,
        n_classes,
    )
    .expect("random codes respect arities")
}
