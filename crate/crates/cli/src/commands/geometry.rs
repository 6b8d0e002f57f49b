use std::f64::consts::PI;

use clap::Args;
use fermi_ee::regions::{Region3D, SampleEstimate, Sampler};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{csv_rows, emit, report, write_csv, OutputArgs};
use crate::specs::{json_or_string, parse_sampler, RegionSpec};

#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryArgs {
    #[arg(long, value_parser = json_or_string)]
    pub region: Option<Value>,
    /// Comma-separated subset of `b3`, `volume`, `tube`.
    #[arg(long, value_delimiter = ',')]
    pub check: Option<Vec<String>>,
    /// Sampler for the section integrals: `grid:N`, `mc:SAMPLES` or JSON.
    #[arg(long, value_parser = json_or_string)]
    pub sampler: Option<Value>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tube_radius: Option<f64>,
    #[arg(long)]
    pub tube_samples: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Serialize)]
struct Resolved {
    region: RegionSpec,
    check: Vec<String>,
    sampler: Sampler,
    seed: u64,
    tube_radius: f64,
    tube_samples: usize,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    check: String,
    estimate: f64,
    std_error: f64,
    samples: usize,
    failures: usize,
    closed_form: f64,
    /// `exact` when `closed_form` is the true value, `first_order` for the
    /// small-radius tube asymptote.
    reference: &'static str,
    /// Value for the smooth shape a mesh approximates.
    analytic: Option<f64>,
    deviation_sigma: Option<f64>,
    pass: Option<bool>,
}

const SIGMA_LEVEL: f64 = 3.0;
const DETERMINISTIC_REL_TOL: f64 = 1e-9;

fn compare(check: &str, e: SampleEstimate, closed_form: f64, exact: bool, analytic: Option<f64>) -> CheckResult {
    let diff = (e.estimate - closed_form).abs();
    let pass = exact.then(|| {
        if e.std_error > 0.0 {
            diff <= SIGMA_LEVEL * e.std_error
        } else {
            diff <= DETERMINISTIC_REL_TOL * closed_form.abs().max(1.0)
        }
    });
    CheckResult {
        check: check.to_string(),
        estimate: e.estimate,
        std_error: e.std_error,
        samples: e.samples,
        failures: e.failures,
        closed_form,
        reference: if exact { "exact" } else { "first_order" },
        analytic,
        deviation_sigma: (e.std_error > 0.0).then(|| diff / e.std_error),
        pass,
    }
}

/// Volume of `{|d| < r}` where a closed form exists, with the exactness flag.
fn tube_reference(region: &Region3D, r: f64) -> (f64, bool) {
    let ball = |radius: f64| 4.0 * PI / 3.0 * radius.powi(3);
    match region {
        Region3D::Box { min, max } => {
            let e: Vec<f64> = (0..3).map(|k| max[k] - min[k]).collect();
            let outer = e[0] * e[1] * e[2]
                + 2.0 * (e[0] * e[1] + e[1] * e[2] + e[2] * e[0]) * r
                + PI * (e[0] + e[1] + e[2]) * r * r
                + ball(r);
            let inner: f64 = e.iter().map(|x| (x - 2.0 * r).max(0.0)).product();
            (outer - inner, true)
        }
        Region3D::Ball { radius, .. } => (ball(radius + r) - ball((radius - r).max(0.0)), true),
        Region3D::Cylinder { radius, z_min, z_max, .. } => {
            let (big_r, h) = (*radius, z_max - z_min);
            let outer = PI * big_r * big_r * h
                + 2.0 * PI * big_r * (h + big_r) * r
                + PI * (h + PI * big_r) * r * r
                + ball(r);
            let inner = PI * (big_r - r).max(0.0).powi(2) * (h - 2.0 * r).max(0.0);
            (outer - inner, true)
        }
        _ => (2.0 * r * region.surface_area(), false),
    }
}

pub fn run(args: &GeometryArgs, out: &OutputArgs) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or(0);
    let cfg = Resolved {
        region: RegionSpec::from_value(args.region.as_ref().unwrap_or(&Value::String("ball".into())))?,
        check: args.check.clone().unwrap_or_else(|| vec!["b3".into(), "volume".into()]),
        sampler: parse_sampler(args.sampler.as_ref().unwrap_or(&Value::String("mc:200000".into())), seed)?,
        seed,
        tube_radius: args.tube_radius.unwrap_or(0.05),
        tube_samples: args.tube_samples.unwrap_or(200_000),
    };
    let region = cfg.region.build()?;
    let sphere = cfg.region.analytic_sphere();

    let mut results = Vec::new();
    for check in &cfg.check {
        let r = match check.as_str() {
            "b3" => compare(
                "b3",
                region.counting_integral(&cfg.sampler)?,
                region.perpendicular_area_integral(),
                true,
                sphere.map(|r| 2.0 * PI * r * r),
            ),
            "volume" => compare(
                "volume",
                region.section_measure_integral(&cfg.sampler)?,
                region.volume(),
                true,
                sphere.map(|r| 4.0 * PI / 3.0 * r.powi(3)),
            ),
            "tube" => {
                let e = region.tubular_volume(cfg.tube_radius, cfg.tube_samples, cfg.seed)?;
                let (closed, exact) = tube_reference(&region, cfg.tube_radius);
                compare("tube", e, closed, exact, None)
            }
            other => {
                return Err(CliError::Usage(format!("check: unknown check '{other}' (expected b3, volume or tube)")))
            }
        };
        results.push(r);
    }

    if let Some(path) = &out.csv {
        write_csv(path, "geometry", &cfg, |w| csv_rows(w, &results))?;
    }
    let result = json!({
        "shape": region.shape_name(),
        "surface_area": region.surface_area(),
        "checks": results,
        "all_pass": results.iter().all(|r| r.pass != Some(false)),
    });
    emit(&report("geometry", &cfg, result), out)
}
