use clap::Args;
use fermi_ee::reduction::{
    landau_levels, predict_entropy_3d, predict_trace_3d, reduced_trace, ReductionOptions, ThinPolicy,
    DEFAULT_MAX_FAILURE_FRACTION,
};
use fermi_ee::regions::Sampler;
use fermi_ee::spectral::SpectralRange;
use fermi_ee::SymbolFunction;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{grid_policy, parse_symbol, require_scales};
use crate::error::CliError;
use crate::output::{csv_rows, emit, report, write_csv, OutputArgs};
use crate::specs::{json_or_string, parse_sampler, RegionSpec};

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ee3dArgs {
    /// `cube`, `ball`, `cylinder`, `zigzag[:N]`, `icosphere[:k]`, `mesh:PATH` or JSON.
    #[arg(long, value_parser = json_or_string)]
    pub region: Option<Value>,
    /// Magnetic field strength.
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<f64>,
    /// Fermi level; must exceed B.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Symbol spec (`mK`, `hγ`, `poly:...`); ignored when `gamma` is set.
    #[arg(long)]
    pub symbol: Option<String>,
    /// Rényi index; selects the entropy symbol and its prediction.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L")]
    pub scales: Option<Vec<f64>>,
    /// `grid:N`, `mc:SAMPLES` or JSON.
    #[arg(long, value_parser = json_or_string)]
    pub sampler: Option<Value>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub npw: Option<f64>,
    #[arg(long)]
    pub matrix_cap: Option<usize>,
    /// `include` or `exclude` sections with very short intervals.
    #[arg(long, value_parser = parse_thin)]
    pub thin: Option<ThinPolicy>,
    #[arg(long)]
    pub max_failure_fraction: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Resolved {
    region: RegionSpec,
    #[serde(rename = "B")]
    b: f64,
    mu: f64,
    symbol: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(rename = "L")]
    scales: Vec<f64>,
    sampler: Sampler,
    seed: u64,
    options: ReductionOptions,
}

#[derive(Serialize)]
struct CsvRecord {
    #[serde(rename = "L")]
    l: f64,
    x1: f64,
    x2: f64,
    level: usize,
    trace: f64,
    defect: f64,
    thin: bool,
}

fn parse_thin(s: &str) -> Result<ThinPolicy, String> {
    match s {
        "include" => Ok(ThinPolicy::Include),
        "exclude" => Ok(ThinPolicy::Exclude),
        _ => Err(format!("expected 'include' or 'exclude', got '{s}'")),
    }
}

pub fn run(args: &Ee3dArgs, out: &OutputArgs) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or(0);
    let region_spec = RegionSpec::from_value(args.region.as_ref().unwrap_or(&Value::String("cube".into())))?;
    let sampler = parse_sampler(args.sampler.as_ref().unwrap_or(&Value::String("grid:16".into())), seed)?;
    let cfg = Resolved {
        region: region_spec,
        b: args.b.unwrap_or(1.0),
        mu: args.mu.unwrap_or(4.0),
        symbol: args.symbol.clone().unwrap_or_else(|| "h1".into()),
        gamma: args.gamma,
        scales: args.scales.clone().unwrap_or_else(|| vec![4.0]),
        sampler,
        seed,
        options: ReductionOptions {
            grid: grid_policy(args.npw, args.matrix_cap),
            thin: args.thin.unwrap_or_default(),
            max_failure_fraction: args.max_failure_fraction.unwrap_or(DEFAULT_MAX_FAILURE_FRACTION),
        },
    };
    require_scales(&cfg.scales)?;
    let spectrum = landau_levels(cfg.b, cfg.mu)?;
    let f = match cfg.gamma {
        Some(g) => SymbolFunction::renyi(g)?,
        None => parse_symbol(&cfg.symbol)?,
    };
    let region = cfg.region.build()?;

    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut range: Option<SpectralRange> = None;
    for &l in &cfg.scales {
        let reduced = reduced_trace(&region, &spectrum, &f, l, &cfg.sampler, &cfg.options)?;
        let prediction = match cfg.gamma {
            Some(g) => predict_entropy_3d(&region, &spectrum, g, l)?,
            None => predict_trace_3d(&region, &spectrum, &f, l)?,
        };
        range = match (range, reduced.spectral_range) {
            (Some(a), Some(b)) => Some(a.merge(b)),
            (a, b) => a.or(b),
        };
        records.extend(reduced.records.iter().map(|r| CsvRecord {
            l,
            x1: r.x_perp[0],
            x2: r.x_perp[1],
            level: r.level,
            trace: r.trace,
            defect: r.defect,
            thin: r.thin,
        }));
        let norm = l * l * l.ln();
        let defect = reduced.value - prediction.volume_term;
        rows.push(json!({
            "L": l,
            "reduced": reduced,
            "prediction": prediction,
            "ratio_two_term": reduced.value / prediction.two_term(),
            "defect": defect,
            "defect_over_L2lnL": defect / norm,
            "ratio_log_term": defect / prediction.log_term,
        }));
    }

    if let Some(path) = &out.csv {
        write_csv(path, "ee3d", &cfg, |w| csv_rows(w, &records))?;
    }
    let result = json!({
        "shape": region.shape_name(),
        "spectrum": spectrum,
        "perpendicular_area": region.perpendicular_area_integral(),
        "rows": rows,
        "spectral_range": range,
    });
    emit(&report("ee3d", &cfg, result), out)
}
