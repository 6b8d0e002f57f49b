//! Two-term Landau–Widom predictions for one-dimensional traces, their error
//! shapes, and least-squares extraction of the logarithmic coefficient from
//! computed traces.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{i_functional, SymbolFunction};
use crate::intervals::IntervalUnion;
use crate::spectral::{self, GridPolicy, SpectralRange};

/// Tolerance used when `𝖨(f)` has no closed form.
pub const I_QUADRATURE_TOL: f64 = 1e-12;
/// Default for the unnamed constants in the bound shapes.
pub const DEFAULT_BOUND_CONSTANT: f64 = 1.0;

/// `volume_term + log_coefficient · ln(log_argument) + O(error_budget)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LWPrediction {
    pub volume_term: f64,
    pub log_coefficient: f64,
    pub log_argument: f64,
    pub error_budget: f64,
}

impl LWPrediction {
    pub fn log_term(&self) -> f64 {
        self.log_coefficient * self.log_argument.ln()
    }

    /// Volume plus logarithmic term, without the bounded remainder.
    pub fn two_term(&self) -> f64 {
        self.volume_term + self.log_term()
    }
}

/// `𝖨(f)`, in closed form when known.
pub fn i_value(f: &SymbolFunction) -> Result<f64> {
    match f.closed_form_i() {
        Some(v) => Ok(v),
        None => i_functional(f, I_QUADRATURE_TOL),
    }
}

fn check_scales(mu: f64, l: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain(format!("Fermi level mu must be > 0, got {mu}")));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::domain(format!("scale L must be > 0, got {l}")));
    }
    Ok(())
}

/// Prediction for the single interval `(0, ℓ)` scaled by `L`.
pub fn lw_predict_single(ell: f64, mu: f64, f: &SymbolFunction, l: f64) -> Result<LWPrediction> {
    check_scales(mu, l)?;
    if !(ell > 0.0) {
        return Err(Error::domain(format!("interval length must be > 0, got {ell}")));
    }
    Ok(LWPrediction {
        volume_term: mu.sqrt() / PI * l * ell * f.value_at_one(),
        log_coefficient: 4.0 * i_value(f)?,
        log_argument: 1.0 + l * ell,
        error_budget: 1.0,
    })
}

/// Prediction for a union of `k` intervals, with the `ln(1 + L)` normalization.
pub fn lw_predict_union(
    omega: &IntervalUnion,
    mu: f64,
    f: &SymbolFunction,
    l: f64,
) -> Result<LWPrediction> {
    check_scales(mu, l)?;
    if omega.is_empty() {
        return Err(Error::domain("interval union is empty"));
    }
    let k = omega.len();
    let lengths = omega.lengths();
    let gaps = omega.gaps();
    let budget = k as f64
        + lengths[k - 1].ln().abs()
        + (0..k - 1).map(|j| lengths[j].ln().abs() + gaps[j].ln().abs()).sum::<f64>();
    Ok(LWPrediction {
        volume_term: mu.sqrt() / PI * l * omega.measure() * f.value_at_one(),
        log_coefficient: 4.0 * k as f64 * i_value(f)?,
        log_argument: 1.0 + l,
        error_budget: budget,
    })
}

/// The logarithm the fit regresses against: `ln(1 + Lℓ)` for one interval,
/// `ln(1 + L)` for unions.
pub fn log_regressor(omega: &IntervalUnion, l: f64) -> f64 {
    if omega.len() == 1 {
        (1.0 + l * omega.measure()).ln()
    } else {
        (1.0 + l).ln()
    }
}

/// Exactly known leading term `(√μ/π) L |Ω| f(1)`.
pub fn volume_term(omega: &IntervalUnion, mu: f64, f: &SymbolFunction, l: f64) -> f64 {
    mu.sqrt() / PI * l * omega.measure() * f.value_at_one()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub intercept: f64,
    pub slope: f64,
    pub residual_rms: f64,
    pub sample_count: usize,
}

impl FitResult {
    pub fn model(&self, regressor: f64) -> f64 {
        self.intercept + self.slope * regressor
    }
}

/// Fits `trace − volume = a + b·regressor(L)` by least squares.
pub fn fit_log_coefficient(
    samples: &[(f64, f64)],
    omega: &IntervalUnion,
    mu: f64,
    f: &SymbolFunction,
) -> Result<FitResult> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 samples, got {}", samples.len())));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(l, _)| (lo.min(l), hi.max(l)));
    if !(lo > 0.0) {
        return Err(Error::Fit(format!("sample scales must be > 0, got {lo}")));
    }
    if hi == lo {
        return Err(Error::Fit("rank-deficient design: all L are equal".into()));
    }
    if hi < 8.0 * lo {
        return Err(Error::Fit(format!("sample scales span only a factor {:.3} (< 8)", hi / lo)));
    }
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(l, tr)| (log_regressor(omega, l), tr - volume_term(omega, mu, f, l)))
        .collect();
    least_squares_line(&points)
}

/// Ordinary least squares for `y = a + b x`.
pub fn least_squares_line(points: &[(f64, f64)]) -> Result<FitResult> {
    let n = points.len() as f64;
    let xm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("rank-deficient design: regressor is constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(FitResult { intercept, slope, residual_rms: (rss / n).sqrt(), sample_count: points.len() })
}

/// `(m−1)/π² Σ_j ln(1 + √μ ℓ_j) + C·m·k`.
pub fn trace_defect_bound(omega: &IntervalUnion, mu: f64, m: u32, constant: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("power m must be >= 2, got {m}")));
    }
    let sqrt_mu = mu.sqrt();
    let logs: f64 = omega.lengths().iter().map(|l| (sqrt_mu * l).ln_1p()).sum();
    Ok((m - 1) as f64 / (PI * PI) * logs + constant * m as f64 * omega.len() as f64)
}

/// `|tr A_{LΩ}^m − Σ_j tr A_{L I_j}^m|` together with the unit-constant shape
/// `Σ_{j<k} ln(1 + Lℓ_j / (1 + L d_j))`.
pub fn decoupling_error(
    omega: &IntervalUnion,
    mu: f64,
    m: u32,
    l: f64,
    policy: &GridPolicy,
) -> Result<(f64, f64)> {
    check_scales(mu, l)?;
    if m < 2 {
        return Err(Error::domain(format!("power m must be >= 2, got {m}")));
    }
    let f = SymbolFunction::monomial(m)?;
    let scaled = omega.scale(l)?;
    let whole = spectral::trace_1d(&scaled, mu, &f, policy)?.trace;
    let mut parts = 0.0;
    for c in scaled.components() {
        parts += spectral::trace_1d(&c, mu, &f, policy)?.trace;
    }
    let lengths = omega.lengths();
    let gaps = omega.gaps();
    let shape = gaps
        .iter()
        .zip(&lengths)
        .map(|(d, ell)| (l * ell / (1.0 + l * d)).ln_1p())
        .sum();
    Ok(((whole - parts).abs(), shape))
}

/// One row of an L-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub l: f64,
    pub trace: f64,
    pub volume: f64,
    pub dim: usize,
    pub range: Option<SpectralRange>,
}

impl SweepRow {
    pub fn defect(&self) -> f64 {
        self.trace - self.volume
    }
}

/// Traces of `f(A_{LΩ})` for every `L`, computed in parallel; the order of
/// `scales` is preserved.
pub fn trace_sweep(
    omega: &IntervalUnion,
    mu: f64,
    f: &SymbolFunction,
    scales: &[f64],
    policy: &GridPolicy,
) -> Result<Vec<SweepRow>> {
    scales
        .par_iter()
        .map(|&l| {
            check_scales(mu, l)?;
            let s = spectral::trace_1d(&omega.scale(l)?, mu, f, policy)?;
            Ok(SweepRow {
                l,
                trace: s.trace,
                volume: volume_term(omega, mu, f, l),
                dim: s.dim,
                range: s.range,
            })
        })
        .collect()
}

pub fn sweep_samples(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    rows.iter().map(|r| (r.l, r.trace)).collect()
}

/// CSV with columns `L,trace,volume,defect,model`.
pub fn write_fit_table<W: Write>(
    mut out: W,
    rows: &[SweepRow],
    omega: &IntervalUnion,
    fit: &FitResult,
) -> std::io::Result<()> {
    writeln!(out, "L,trace,volume,defect,model")?;
    for r in rows {
        let model = r.volume + fit.model(log_regressor(omega, r.l));
        writeln!(out, "{},{:e},{:e},{:e},{:e}", r.l, r.trace, r.volume, r.defect(), model)?;
    }
    Ok(())
}
