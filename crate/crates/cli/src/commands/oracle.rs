use hocmim_core::{run_oracle_suite, OracleConfig};

use crate::args::{Format, OracleArgs};

pub fn run(args: &OracleArgs) -> anyhow::Result<i32> {
    let cfg = OracleConfig {
        n_instances: args.instances,
        seed: args.seed,
        max_features: args.max_features as usize,
        max_rows: args.max_rows as usize,
        ..OracleConfig::default()
    };
    let report = run_oracle_suite(&cfg)?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            println!("check,passed,failed");
            for c in &report.checks {
                println!("{},{},{}", c.name, c.passed, c.failed);
            }
        }
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(i32::from(report.failures() > 0))
}
