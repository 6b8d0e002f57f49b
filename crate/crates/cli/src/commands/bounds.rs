use clap::Args;
use fermi_ee::functional::convolution_bound_check;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::CliError;
use crate::output::{csv_rows, emit, report, write_csv, OutputArgs};

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsArgs {
    /// Comma-separated convolution orders.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Resolved {
    m: Vec<u32>,
}

pub fn run(args: &BoundsArgs, out: &OutputArgs) -> Result<(), CliError> {
    let cfg = Resolved { m: args.m.clone().unwrap_or_else(|| (1..=6).collect()) };
    let rows = cfg.m.iter().map(|&m| convolution_bound_check(m)).collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &out.csv {
        write_csv(path, "bounds", &cfg, |w| csv_rows(w, &rows))?;
    }
    let result = json!({ "rows": rows, "all_pass": rows.iter().all(|r| r.passes) });
    emit(&report("bounds", &cfg, result), out)
}
