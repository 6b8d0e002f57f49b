use clap::Args;
use fermi_ee::asymptotics::{
    fit_log_coefficient, i_value, lw_predict_union, sweep_samples, trace_sweep, write_fit_table,
};
use fermi_ee::spectral::{GridPolicy, SpectralRange};
use fermi_ee::IntervalUnion;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{grid_policy, parse_symbol, require_scales};
use crate::error::CliError;
use crate::output::{csv_rows, emit, report, write_csv, OutputArgs};
use crate::specs::interval_pair;

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trace1dArgs {
    /// Interval `left,right`; repeat the flag for a union.
    #[arg(long = "interval", value_parser = interval_pair)]
    pub intervals: Option<Vec<[f64; 2]>>,
    /// Fermi level.
    #[arg(long)]
    pub mu: Option<f64>,
    /// `mK`, `hγ` or `poly:c0,c1,...`.
    #[arg(long)]
    pub symbol: Option<String>,
    /// Comma-separated scales.
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L")]
    pub scales: Option<Vec<f64>>,
    /// Quadrature nodes per wavelength 2π/√μ.
    #[arg(long)]
    pub npw: Option<f64>,
    #[arg(long)]
    pub matrix_cap: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Resolved {
    intervals: Vec<[f64; 2]>,
    mu: f64,
    symbol: String,
    #[serde(rename = "L")]
    scales: Vec<f64>,
    grid: GridPolicy,
}

#[derive(Serialize)]
struct Row {
    #[serde(rename = "L")]
    l: f64,
    trace: f64,
    volume: f64,
    defect: f64,
}

pub fn run(args: &Trace1dArgs, out: &OutputArgs) -> Result<(), CliError> {
    let cfg = Resolved {
        intervals: args.intervals.clone().unwrap_or_else(|| vec![[0.0, 1.0]]),
        mu: args.mu.unwrap_or(1.0),
        symbol: args.symbol.clone().unwrap_or_else(|| "h1".into()),
        scales: args.scales.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0, 160.0]),
        grid: grid_policy(args.npw, args.matrix_cap),
    };
    require_scales(&cfg.scales)?;
    let raw: Vec<(f64, f64)> = cfg.intervals.iter().map(|p| (p[0], p[1])).collect();
    let omega = IntervalUnion::normalize_default(&raw)?;
    let f = parse_symbol(&cfg.symbol)?;

    let rows = trace_sweep(&omega, cfg.mu, &f, &cfg.scales, &cfg.grid)?;
    let fit = if rows.len() >= 4 {
        Some(fit_log_coefficient(&sweep_samples(&rows), &omega, cfg.mu, &f)?)
    } else {
        None
    };
    let range = rows.iter().filter_map(|r| r.range).reduce(SpectralRange::merge);
    let predictions = cfg
        .scales
        .iter()
        .map(|&l| lw_predict_union(&omega, cfg.mu, &f, l))
        .collect::<Result<Vec<_>, _>>()?;

    if let Some(path) = &out.csv {
        write_csv(path, "trace1d", &cfg, |w| match &fit {
            Some(fit) => write_fit_table(w, &rows, &omega, fit),
            None => {
                let table: Vec<Row> = rows
                    .iter()
                    .map(|r| Row { l: r.l, trace: r.trace, volume: r.volume, defect: r.defect() })
                    .collect();
                csv_rows(w, &table)
            }
        })?;
    }

    let table: Vec<_> = rows
        .iter()
        .zip(&predictions)
        .map(|(r, p)| {
            json!({
                "L": r.l,
                "trace": r.trace,
                "volume": r.volume,
                "defect": r.defect(),
                "dim": r.dim,
                "predicted": p.two_term(),
                "error_budget": p.error_budget,
            })
        })
        .collect();
    let result = json!({
        "omega": omega.intervals(),
        "i_value": i_value(&f)?,
        "predicted_log_coefficient": predictions[0].log_coefficient,
        "rows": table,
        "fit": fit,
        "spectral_range": range,
    });
    emit(&report("trace1d", &cfg, result), out)
}
