//! Landau levels, the two-term predictions for three-dimensional traces, and
//! the reduction of those traces to planar integrals of one-dimensional
//! sine-kernel traces, one per occupied level.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::i_value;
use crate::error::{Error, Result};
use crate::functional::SymbolFunction;
use crate::intervals::IntervalUnion;
use crate::regions::{CrossSection, Region3D, Sampler};
use crate::spectral::{self, GridPolicy, SpectralRange};

/// Magnetic field strength, Fermi level and the occupied Landau levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub b: f64,
    pub mu: f64,
    pub nu: u32,
    /// `μ(ℓ) = μ − (2ℓ+1)B` for `ℓ < ν`.
    pub mu_levels: Vec<f64>,
}

/// `ν = ⌈(μ/B − 1)/2⌉` occupied levels.
pub fn landau_levels(b: f64, mu: f64) -> Result<SpectrumConfig> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!("field strength B must be > 0, got {b}")));
    }
    if !mu.is_finite() || mu <= b {
        return Err(Error::domain(format!(
            "Fermi level mu = {mu} must exceed B = {b}; otherwise the ground state is zero"
        )));
    }
    let mut nu = ((mu / b - 1.0) / 2.0).ceil() as u32;
    // guard against rounding in the last level
    while nu > 1 && mu - (2 * nu - 1) as f64 * b <= 0.0 {
        nu -= 1;
    }
    let mu_levels = (0..nu).map(|l| mu - (2 * l + 1) as f64 * b).collect();
    Ok(SpectrumConfig { b, mu, nu, mu_levels })
}

impl SpectrumConfig {
    pub fn sqrt_mu_sum(&self) -> f64 {
        self.mu_levels.iter().map(|m| m.sqrt()).sum()
    }
}

/// Volume and `L² ln L` terms of the large-scale expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EEPrediction {
    pub l: f64,
    pub volume_term: f64,
    pub log_term: f64,
    pub per_level_volume: Vec<f64>,
    /// Coefficient of `L² ln L`.
    pub log_coefficient: f64,
}

impl EEPrediction {
    pub fn two_term(&self) -> f64 {
        self.volume_term + self.log_term
    }
}

fn check_scale(l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::domain(format!("scale L must be > 0, got {l}")));
    }
    Ok(())
}

fn prediction(region: &Region3D, cfg: &SpectrumConfig, f1: f64, i: f64, l: f64) -> EEPrediction {
    let vol = region.volume();
    let per_level_volume: Vec<f64> = cfg
        .mu_levels
        .iter()
        .map(|m| l.powi(3) * cfg.b / (2.0 * PI * PI) * m.sqrt() * f1 * vol)
        .collect();
    let log_coefficient = cfg.nu as f64 * cfg.b * i / PI * region.perpendicular_area_integral();
    EEPrediction {
        l,
        volume_term: per_level_volume.iter().sum(),
        log_term: l * l * l.ln() * log_coefficient,
        per_level_volume,
        log_coefficient,
    }
}

/// `L³ (B/2π²) Σ√μ(ℓ) f(1)|Λ| + L² ln L · νB 𝖨(f) (1/π) ∫_{∂Λ}|n·e₃|`.
pub fn predict_trace_3d(
    region: &Region3D,
    cfg: &SpectrumConfig,
    f: &SymbolFunction,
    l: f64,
) -> Result<EEPrediction> {
    check_scale(l)?;
    Ok(prediction(region, cfg, f.value_at_one(), i_value(f)?, l))
}

/// Rényi entropy of index `γ`: no volume term and coefficient
/// `νB (1+γ)/(24γπ) ∫_{∂Λ}|n·e₃|`.
pub fn predict_entropy_3d(region: &Region3D, cfg: &SpectrumConfig, gamma: f64, l: f64) -> Result<EEPrediction> {
    check_scale(l)?;
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("Renyi index must be > 0, got {gamma}")));
    }
    Ok(prediction(region, cfg, 0.0, (1.0 + gamma) / (24.0 * gamma), l))
}

/// What to do with sections that have an interval shorter than a few
/// quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinPolicy {
    /// Solve them anyway (every interval gets at least the minimum number of
    /// Gauss nodes) and report how many there were.
    #[default]
    Include,
    /// Drop their contribution and report the dropped measure.
    Exclude,
}

/// An interval is thin when it spans fewer than this many nodes.
pub const THIN_NODE_COUNT: f64 = 4.0;
pub const DEFAULT_MAX_FAILURE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionOptions {
    pub grid: GridPolicy,
    pub thin: ThinPolicy,
    pub max_failure_fraction: f64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { grid: GridPolicy::default(), thin: ThinPolicy::Include, max_failure_fraction: DEFAULT_MAX_FAILURE_FRACTION }
    }
}

/// One `(x⊥, level)` evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub x_perp: [f64; 2],
    pub level: usize,
    pub trace: f64,
    /// `trace − (√μ(ℓ)/π) L |Λ_{x⊥}| f(1)`.
    pub defect: f64,
    pub thin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedTrace {
    pub value: f64,
    pub std_error: f64,
    pub per_level: Vec<f64>,
    pub samples: usize,
    pub unique_problems: usize,
    pub thin_samples: usize,
    /// Footprint measure of the thin samples, `area · thin/samples`.
    pub thin_measure: f64,
    pub failed_points: Vec<[f64; 2]>,
    pub spectral_range: Option<SpectralRange>,
    pub max_dim: usize,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

fn section_key(level: usize, s: &IntervalUnion) -> (usize, Vec<u64>) {
    let bits = s.intervals().iter().flat_map(|&(a, b)| [a.to_bits(), b.to_bits()]).collect();
    (level, bits)
}

fn is_thin(s: &IntervalUnion, l: f64, mu: f64, policy: &GridPolicy) -> bool {
    let min_len = THIN_NODE_COUNT / policy.density(mu);
    s.lengths().iter().any(|&len| l * len < min_len)
}

/// `L² (B/2π) Σ_ℓ ∫ dx⊥ tr f(A_{μ(ℓ)}(L·Λ_{x⊥}))`.
///
/// Identical sections are solved once; the sample order and all sums are
/// fixed, so the result does not depend on the number of workers.
pub fn reduced_trace(
    region: &Region3D,
    cfg: &SpectrumConfig,
    f: &SymbolFunction,
    l: f64,
    sampler: &Sampler,
    options: &ReductionOptions,
) -> Result<ReducedTrace> {
    check_scale(l)?;
    let rect = region.footprint();
    let area = (rect[0][1] - rect[0][0]) * (rect[1][1] - rect[1][0]);
    let points = sampler.points(rect);
    if points.is_empty() {
        return Err(Error::domain("sampler produced no points"));
    }
    let sections: Vec<Result<CrossSection>> = points.par_iter().map(|&p| region.cross_section(p)).collect();

    let levels = cfg.mu_levels.len();
    let mut keys: HashMap<(usize, Vec<u64>), usize> = HashMap::new();
    let mut problems: Vec<(usize, IntervalUnion)> = Vec::new();
    // per sample and level: index into `problems`, None for empty sections
    let mut slots: Vec<Option<Vec<Option<usize>>>> = Vec::with_capacity(points.len());
    for s in &sections {
        let Ok(cs) = s else {
            slots.push(None);
            continue;
        };
        let row = (0..levels)
            .map(|lv| {
                if cs.intervals.is_empty() {
                    return None;
                }
                let next = problems.len();
                let id = *keys.entry(section_key(lv, &cs.intervals)).or_insert_with(|| {
                    problems.push((lv, cs.intervals.clone()));
                    next
                });
                Some(id)
            })
            .collect();
        slots.push(Some(row));
    }

    let solved: Vec<Result<spectral::TraceSample>> = problems
        .par_iter()
        .map(|(lv, s)| spectral::trace_1d(&s.scale(l)?, cfg.mu_levels[*lv], f, &options.grid))
        .collect();

    let f1 = f.value_at_one();
    let mut records = Vec::with_capacity(points.len() * levels);
    let mut failed_points = Vec::new();
    let mut first_error = None;
    let mut level_sums = vec![0.0; levels];
    let mut totals = Vec::with_capacity(points.len());
    let mut thin_samples = 0usize;
    let mut range: Option<SpectralRange> = None;
    let mut max_dim = 0;
    'samples: for (k, row) in slots.iter().enumerate() {
        let Some(row) = row else {
            failed_points.push(points[k]);
            if let Err(e) = &sections[k] {
                first_error.get_or_insert_with(|| e.clone());
            }
            continue;
        };
        let section = &sections[k].as_ref().expect("section present").intervals;
        let mut per = vec![0.0; levels];
        let mut thin = false;
        for (lv, slot) in row.iter().enumerate() {
            let Some(id) = slot else { continue };
            match &solved[*id] {
                Ok(ts) => {
                    per[lv] = ts.trace;
                    thin |= is_thin(section, l, cfg.mu_levels[lv], &options.grid);
                }
                Err(e) => {
                    failed_points.push(points[k]);
                    first_error.get_or_insert_with(|| e.clone());
                    continue 'samples;
                }
            }
        }
        if thin {
            thin_samples += 1;
        }
        for (lv, slot) in row.iter().enumerate() {
            let volume = cfg.mu_levels[lv].sqrt() / PI * l * section.measure() * f1;
            records.push(SampleRecord { x_perp: points[k], level: lv, trace: per[lv], defect: per[lv] - volume, thin });
            if let Some(id) = slot {
                if let Ok(ts) = &solved[*id] {
                    max_dim = max_dim.max(ts.dim);
                    if let Some(r) = ts.range {
                        range = Some(range.map_or(r, |acc| acc.merge(r)));
                    }
                }
            }
        }
        if thin && options.thin == ThinPolicy::Exclude {
            per.iter_mut().for_each(|v| *v = 0.0);
        }
        for lv in 0..levels {
            level_sums[lv] += per[lv];
        }
        totals.push(per.iter().sum::<f64>());
    }

    let failures = failed_points.len();
    if failures as f64 > options.max_failure_fraction * points.len() as f64 || totals.is_empty() {
        let listed: Vec<String> = failed_points.iter().take(10).map(|p| format!("({}, {})", p[0], p[1])).collect();
        return Err(Error::Resource(format!(
            "{failures} of {} samples failed at x_perp = {}{}; first error: {}",
            points.len(),
            listed.join(", "),
            if failures > 10 { ", ..." } else { "" },
            first_error.map(|e| e.to_string()).unwrap_or_default()
        )));
    }

    let n = totals.len() as f64;
    let prefactor = l * l * cfg.b / (2.0 * PI) * area;
    let per_level: Vec<f64> = level_sums.iter().map(|s| prefactor * s / n).collect();
    let value = per_level.iter().sum();
    let std_error = if matches!(sampler, Sampler::MonteCarlo { .. }) && totals.len() > 1 {
        let mean = totals.iter().sum::<f64>() / n;
        let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prefactor * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(ReducedTrace {
        value,
        std_error,
        per_level,
        samples: points.len(),
        unique_problems: problems.len(),
        thin_samples,
        thin_measure: area * thin_samples as f64 / points.len() as f64,
        failed_points,
        spectral_range: range,
        max_dim,
        records,
    })
}

/// CSV with columns `x1,x2,level,trace,defect,thin`.
pub fn write_sample_csv<W: Write>(mut out: W, records: &[SampleRecord]) -> std::io::Result<()> {
    writeln!(out, "x1,x2,level,trace,defect,thin")?;
    for r in records {
        writeln!(out, "{},{},{},{:e},{:e},{}", r.x_perp[0], r.x_perp[1], r.level, r.trace, r.defect, r.thin)?;
    }
    Ok(())
}

/// `(tr f(A_{μℓ}(L·Λ_{x⊥})) − (√μℓ/π) L |Λ_{x⊥}| f(1)) / ln L` for each `L`,
/// which tends to `2𝖨(f)·#∂Λ_{x⊥}`.
pub fn pointwise_log_limit(
    region: &Region3D,
    x_perp: [f64; 2],
    mu_level: f64,
    f: &SymbolFunction,
    scales: &[f64],
    policy: &GridPolicy,
) -> Result<Vec<(f64, f64)>> {
    let cs = region.cross_section(x_perp)?;
    if cs.intervals.is_empty() {
        return Err(Error::domain(format!("cross section at ({}, {}) is empty", x_perp[0], x_perp[1])));
    }
    scales
        .par_iter()
        .map(|&l| {
            if !(l > 1.0) {
                return Err(Error::domain(format!("scale L must be > 1 for a log normalization, got {l}")));
            }
            let tr = spectral::trace_1d(&cs.intervals.scale(l)?, mu_level, f, policy)?.trace;
            let volume = mu_level.sqrt() / PI * l * cs.intervals.measure() * f.value_at_one();
            Ok((l, (tr - volume) / l.ln()))
        })
        .collect()
}
