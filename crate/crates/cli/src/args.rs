use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hocmim_core::{
    Criterion, CriterionKind, EstimatorKind, HocmimParams, OrderMode, Representation,
};

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(name = "hocmim", version, about = "Information-theoretic feature selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the features of one dataset.
    Select(SelectArgs),
    /// Compare criteria with KNN over repeated train/test splits.
    Benchmark(BenchmarkArgs),
    /// Rerun the worked ten-row example and compare with its printed values.
    Toy(ToyArgs),
    /// Cross-check estimators and criteria on random small datasets.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KnnRepr {
    Codes,
    Onehot,
}

impl From<KnnRepr> for Representation {
    fn from(r: KnnRepr) -> Self {
        match r {
            KnnRepr::Codes => Representation::Codes,
            KnnRepr::Onehot => Representation::OneHot,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Class column; defaults to the last column.
    #[arg(long)]
    pub target: Option<String>,
    /// Equal-width bins per numeric column.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub bins: u32,
    /// Fit binning on all rows instead of each training split.
    #[arg(long)]
    pub global_binning: bool,
    /// Use the generated parity dataset instead of a file.
    #[arg(long, conflicts_with = "dataset")]
    pub synthetic_xor: bool,
    /// Rows of the generated parity dataset.
    #[arg(long, default_value_t = 512, requires = "synthetic_xor")]
    pub xor_rows: usize,
}

/// A criterion as spelled on the command line; `hocmim-n2` fixes the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionName {
    Kind(CriterionKind),
    HocmimFixed(usize),
}

impl FromStr for CriterionName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        if let Some(n) = lower.strip_prefix("hocmim-n") {
            return match n.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(Self::HocmimFixed(n)),
                _ => Err(format!("bad order in `{s}`")),
            };
        }
        CriterionKind::from_str(&lower)
            .map(Self::Kind)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Args)]
pub struct CriterionArgs {
    /// Criterion names, repeatable or comma separated (e.g. `mim,cmim,hocmim-n2`).
    #[arg(long, value_delimiter = ',', default_value = "hocmim")]
    pub criterion: Vec<CriterionName>,
    /// Fixed HOCMIM order.
    #[arg(long, conflicts_with = "adaptive")]
    pub n: Option<usize>,
    /// Adaptive HOCMIM order (the default when `--n` is absent).
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 15)]
    pub nmax: usize,
    /// Redundancy weight for `mifs` and `generic`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Conditional-redundancy weight for `generic`.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value = "plugin")]
    pub estimator: EstimatorKind,
}

impl CriterionArgs {
    pub fn build(&self) -> anyhow::Result<Vec<Criterion>> {
        let usage = |m: String| anyhow::Error::new(UsageError(m));
        let takes = |pred: fn(&CriterionName) -> bool| self.criterion.iter().any(pred);
        if self.beta.is_some()
            && !takes(|c| {
                matches!(c, CriterionName::Kind(CriterionKind::Mifs | CriterionKind::Generic))
            })
        {
            return Err(usage("--beta needs a mifs or generic criterion".into()));
        }
        if self.gamma.is_some() && !takes(|c| matches!(c, CriterionName::Kind(CriterionKind::Generic))) {
            return Err(usage("--gamma needs a generic criterion".into()));
        }
        if (self.n.is_some() || self.adaptive)
            && !takes(|c| matches!(c, CriterionName::Kind(CriterionKind::Hocmim)))
        {
            return Err(usage("--n and --adaptive need the hocmim criterion".into()));
        }

        let base = HocmimParams {
            epsilon_star: self.epsilon,
            n_max: self.nmax,
            mode: OrderMode::Adaptive,
        };
        self.criterion
            .iter()
            .map(|name| {
                let c = match *name {
                    CriterionName::HocmimFixed(n) => Criterion::hocmim(HocmimParams {
                        mode: OrderMode::Fixed(n),
                        n_max: base.n_max.max(n),
                        ..base
                    }),
                    CriterionName::Kind(CriterionKind::Hocmim) => Criterion::hocmim(HocmimParams {
                        mode: self.n.map_or(OrderMode::Adaptive, OrderMode::Fixed),
                        ..base
                    }),
                    CriterionName::Kind(kind) => {
                        let mut c = Criterion::new(kind);
                        if let (Some(b), CriterionKind::Mifs | CriterionKind::Generic) = (self.beta, kind) {
                            c = c.with_beta(b)?;
                        }
                        if let (Some(g), CriterionKind::Generic) = (self.gamma, kind) {
                            c = c.with_gamma(g)?;
                        }
                        Ok(c)
                    }
                };
                c.map_err(|e| usage(e.to_string()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub criterion: CriterionArgs,
    /// Features to select; defaults to all.
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed of the generated parity dataset.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write every candidate's representative-set trace (hocmim only) as JSON.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub criterion: CriterionArgs,
    /// Largest top-K evaluated; defaults to min(10, features).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub knn_k: u64,
    #[arg(long, value_enum, default_value_t = KnnRepr::Codes)]
    pub knn_repr: KnnRepr,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ToyArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(3..=8))]
    pub max_features: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(8..))]
    pub max_rows: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_names() {
        assert_eq!(
            "hocmim-n2".parse::<CriterionName>(),
            Ok(CriterionName::HocmimFixed(2))
        );
        assert_eq!(
            "CMIM".parse::<CriterionName>(),
            Ok(CriterionName::Kind(CriterionKind::Cmim))
        );
        assert!("hocmim-n0".parse::<CriterionName>().is_err());
        assert!("lasso".parse::<CriterionName>().is_err());
    }

    #[test]
    fn parameters_reach_their_criteria() {
        let cli = Cli::try_parse_from([
            "hocmim", "select", "--synthetic-xor", "--criterion", "mifs,hocmim", "--beta", "0.5",
            "--n", "3",
        ])
        .unwrap();
        let Command::Select(a) = cli.command else { panic!() };
        let c = a.criterion.build().unwrap();
        assert_eq!(c[0].beta, 0.5);
        assert_eq!(c[1].hocmim.mode, OrderMode::Fixed(3));
    }

    #[test]
    fn misplaced_parameters_are_usage_errors() {
        let cli =
            Cli::try_parse_from(["hocmim", "select", "--synthetic-xor", "--criterion", "jmi", "--gamma", "1"])
                .unwrap();
        let Command::Select(a) = cli.command else { panic!() };
        assert!(a.criterion.build().unwrap_err().downcast_ref::<UsageError>().is_some());
        assert!(Cli::try_parse_from(["hocmim", "benchmark", "--repeats", "0"]).is_err());
        assert!(Cli::try_parse_from(["hocmim", "select", "--criterion", "nope"]).is_err());
        assert!(Cli::try_parse_from(["hocmim", "select", "--n", "2", "--adaptive"]).is_err());
    }
}
