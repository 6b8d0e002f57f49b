use std::path::PathBuf;

use clap::Args;
use fermi_ee::counterexample::{
    build_envelope, epsilon0, exceedance_threshold, measure_error_term, sequence_from_envelope, write_envelope_csv,
    write_sequence_csv, zigzag_prism, DecayProfile, DecaySequence, DEFAULT_ENVELOPE_GRID, DEFAULT_EPS0_CONSTANT, DEFAULT_TRUNCATION,
};
use fermi_ee::reduction::{landau_levels, ReductionOptions};
use fermi_ee::regions::Sampler;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{grid_policy, require_scales};
use crate::error::CliError;
use crate::output::{csv_rows, emit, report, write_csv, OutputArgs};
use crate::specs::{json_or_string, parse_profile, parse_sampler};

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleArgs {
    /// Decay profile: `zero`, `inverse_log`, `power:P` or JSON.
    #[arg(long, value_parser = json_or_string)]
    pub phi: Option<Value>,
    /// Truncation length of the decay sequence.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Constant in ε₀(L) = Σ_{a_i<1/L} a_i − C/ln L.
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L")]
    pub scales: Option<Vec<f64>>,
    /// Window [0, T] on which the envelope is built.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub envelope_grid: Option<usize>,
    /// Also measure the error term of a coarse zigzag prism at every L.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub measure: Option<bool>,
    /// Scales at which the error term is measured.
    #[arg(long = "measure-L", value_delimiter = ',')]
    #[serde(rename = "measure_L")]
    pub measure_scales: Option<Vec<f64>>,
    /// Number of blocks of the measured prism.
    #[arg(long)]
    pub measure_blocks: Option<usize>,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, value_parser = json_or_string)]
    pub sampler: Option<Value>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub npw: Option<f64>,
    #[arg(long)]
    pub matrix_cap: Option<usize>,
    /// Write the sequence (`i,a,cumulative`) here.
    #[arg(long)]
    pub sequence_csv: Option<PathBuf>,
    /// Write `t,env` samples of the envelope here.
    #[arg(long)]
    pub envelope_csv: Option<PathBuf>,
    /// Write the measured prism as a triangle mesh here.
    #[arg(long)]
    pub mesh_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Serialize)]
struct MeasureConfig {
    #[serde(rename = "L")]
    scales: Vec<f64>,
    blocks: usize,
    #[serde(rename = "B")]
    b: f64,
    mu: f64,
    sampler: Sampler,
    seed: u64,
    options: ReductionOptions,
}

#[derive(Debug, Serialize)]
struct Resolved {
    phi: DecayProfile,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "L")]
    scales: Vec<f64>,
    t_max: f64,
    envelope_grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    measure: Option<MeasureConfig>,
}

#[derive(Debug, Serialize)]
struct Row {
    #[serde(rename = "L")]
    l: f64,
    eps0: f64,
    phi: f64,
}

#[derive(Debug, Serialize)]
struct Measurement {
    #[serde(rename = "L")]
    l: f64,
    epsilon: f64,
    std_error: f64,
    trace: f64,
    leading: f64,
    thin_samples: usize,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    #[serde(rename = "L")]
    l: f64,
    eps0: f64,
    phi: f64,
    epsilon: Option<f64>,
    epsilon_std_error: Option<f64>,
}

/// ε₀ rows and measurements joined on `L`.
fn csv_table(cfg: &Resolved, seq: &DecaySequence, rows: &[Row], measured: &[Measurement]) -> Result<Vec<CsvRow>, CliError> {
    let mut scales: Vec<f64> = rows.iter().map(|r| r.l).chain(measured.iter().map(|m| m.l)).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    scales
        .into_iter()
        .map(|l| {
            let m = measured.iter().find(|m| m.l == l);
            Ok(CsvRow {
                l,
                eps0: epsilon0(l, seq, cfg.c)?,
                phi: cfg.phi.eval(l),
                epsilon: m.map(|m| m.epsilon),
                epsilon_std_error: m.map(|m| m.std_error),
            })
        })
        .collect()
}

const ENVELOPE_CSV_POINTS: usize = 400;

pub fn run(args: &CounterexampleArgs, out: &OutputArgs) -> Result<(), CliError> {
    let phi = parse_profile(args.phi.as_ref().unwrap_or(&Value::String("inverse_log".into())))?;
    let n = args.n.unwrap_or(DEFAULT_TRUNCATION);
    let seed = args.seed.unwrap_or(0);
    let measure = match args.measure.unwrap_or(false) {
        false => None,
        true => Some(MeasureConfig {
            scales: args.measure_scales.clone().unwrap_or_else(|| vec![2.0, 4.0]),
            blocks: args.measure_blocks.unwrap_or(32),
            b: args.b.unwrap_or(1.0),
            mu: args.mu.unwrap_or(3.0),
            sampler: parse_sampler(args.sampler.as_ref().unwrap_or(&Value::String("grid:16".into())), seed)?,
            seed,
            options: ReductionOptions { grid: grid_policy(args.npw, args.matrix_cap), ..Default::default() },
        }),
    };
    let mut scales = args.scales.clone().unwrap_or_else(|| (1..=8).map(|k| 10f64.powi(k)).collect());
    scales.sort_by(f64::total_cmp);
    let cfg = Resolved {
        phi,
        n,
        c: args.c.unwrap_or(DEFAULT_EPS0_CONSTANT),
        scales,
        t_max: args.t_max.unwrap_or((10 * n) as f64),
        envelope_grid: args.envelope_grid.unwrap_or(DEFAULT_ENVELOPE_GRID),
        measure,
    };
    require_scales(&cfg.scales)?;

    let env = build_envelope(|t| cfg.phi.eval(t), cfg.t_max, cfg.envelope_grid)?;
    let seq = sequence_from_envelope(&env, cfg.n)?;
    let rows = cfg
        .scales
        .iter()
        .map(|&l| Ok(Row { l, eps0: epsilon0(l, &seq, cfg.c)?, phi: cfg.phi.eval(l) }))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut measured_prism = None;
    let mut measurements = Vec::new();
    if let Some(m) = &cfg.measure {
        require_scales(&m.scales)?;
        let coarse = sequence_from_envelope(&env, m.blocks)?;
        let spectrum = landau_levels(m.b, m.mu)?;
        for &l in &m.scales {
            let e = measure_error_term(&coarse, &spectrum, l, &m.sampler, &m.options)?;
            measurements.push(Measurement {
                l,
                epsilon: e.epsilon,
                std_error: e.std_error,
                trace: e.trace,
                leading: e.leading,
                thin_samples: e.reduced.thin_samples,
            });
        }
        let prism = zigzag_prism(&coarse)?;
        measured_prism = Some(json!({
            "blocks": prism.blocks(),
            "volume": prism.volume(),
            "surface_area": prism.surface_area(),
            "max_height": prism.max_height(),
            "spectrum": spectrum,
        }));
        if let Some(path) = &args.mesh_out {
            let text = prism.to_mesh()?.to_text();
            std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
        }
    }

    if let Some(path) = &args.sequence_csv {
        write_csv(path, "counterexample", &cfg, |w| write_sequence_csv(w, &seq))?;
    }
    if let Some(path) = &args.envelope_csv {
        write_csv(path, "counterexample", &cfg, |w| write_envelope_csv(w, &env, ENVELOPE_CSV_POINTS))?;
    }
    if let Some(path) = &out.csv {
        let table = csv_table(&cfg, &seq, &rows, &measurements)?;
        write_csv(path, "counterexample", &cfg, |w| csv_rows(w, &table))?;
    }

    let triples: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.l, r.eps0, r.phi)).collect();
    let nondecreasing = rows.windows(2).all(|w| w[1].eps0 >= w[0].eps0);
    let result = json!({
        "envelope": {
            "normalization": env.normalization,
            "sqrt_ratio_min": env.sqrt_ratio_min,
            "hull_vertices": env.hull_vertices().len(),
        },
        "sequence": {
            "len": seq.len(),
            "first": seq.a[0],
            "last": seq.a[seq.len() - 1],
            "tail": seq.tail_sum,
        },
        "rows": rows,
        "eps0_exceeds_phi_from": exceedance_threshold(&triples),
        "eps0_nondecreasing": nondecreasing,
        "measured_prism": measured_prism,
        "measurements": measurements,
    });
    emit(&report("counterexample", &cfg, result), out)
}
