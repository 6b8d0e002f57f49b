use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Slack allowed outside `[0, 1]` before `entropy_h` rejects its argument.
pub const ENTROPY_DOMAIN_SLACK: f64 = 1e-9;

/// Rényi entropy function `h_γ` on `[0, 1]`.
///
/// Values within [`ENTROPY_DOMAIN_SLACK`] of the interval are clamped.
pub fn entropy_h(gamma: f64, t: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("Renyi index must be > 0, got {gamma}")));
    }
    if !(t >= -ENTROPY_DOMAIN_SLACK && t <= 1.0 + ENTROPY_DOMAIN_SLACK) {
        return Err(Error::domain(format!("entropy argument {t} outside [0, 1]")));
    }
    Ok(renyi(gamma, t.clamp(0.0, 1.0)))
}

fn renyi(gamma: f64, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    renyi_pair(gamma, t, 1.0 - t)
}

/// Same as [`renyi`] but taking both `t` and `1 - t` so that arguments close
/// to one keep their full relative precision.
fn renyi_pair(gamma: f64, t: f64, s: f64) -> f64 {
    if t <= 0.0 || s <= 0.0 {
        return 0.0;
    }
    let (lo, hi) = if t < s { (t, s) } else { (s, t) };
    // the larger argument may be a rounded 1 - lo; its log is taken from lo
    let ln_hi = (-lo).ln_1p();
    if gamma == 1.0 {
        -lo * lo.ln() - hi * ln_hi
    } else {
        // ln(t^γ + s^γ) = γ ln(max) + ln(1 + (min/max)^γ)
        (gamma * ln_hi + (lo / hi).powf(gamma).ln_1p()) / (1.0 - gamma)
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user supplied symbol with a known Hölder exponent at the endpoints.
#[derive(Clone)]
pub struct CustomSymbol {
    pub label: String,
    pub holder_exponent: f64,
    eval: Evaluator,
}

impl fmt::Debug for CustomSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSymbol")
            .field("label", &self.label)
            .field("holder_exponent", &self.holder_exponent)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum SymbolKind {
    /// `t ↦ t^m`.
    Monomial(u32),
    /// `t ↦ Σ_k c_k t^{k+1}`; the constant term is zero by construction.
    Polynomial(Vec<f64>),
    /// `h_γ`.
    Renyi(f64),
    Custom(CustomSymbol),
}

/// A function `f: [0,1] → ℝ` with `f(0) = 0`, as it enters trace formulas.
#[derive(Debug, Clone)]
pub struct SymbolFunction {
    kind: SymbolKind,
    value_at_one: f64,
    closed_form_i: Option<f64>,
}

impl SymbolFunction {
    pub fn monomial(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::validation("monomial degree must be >= 1 (f(0) = 0)"));
        }
        Ok(Self::from_kind(SymbolKind::Monomial(m)))
    }

    /// Polynomial with `coefficients[k]` multiplying `t^{k+1}`.
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::validation("polynomial needs at least one coefficient"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("polynomial coefficients must be finite"));
        }
        Ok(Self::from_kind(SymbolKind::Polynomial(coefficients)))
    }

    pub fn renyi(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("Renyi index must be > 0, got {gamma}")));
        }
        Ok(Self::from_kind(SymbolKind::Renyi(gamma)))
    }

    /// `t ↦ t - t²`, whose trace is the spectral defect `tr(A - A²)`.
    pub fn linear_minus_square() -> Self {
        Self::from_kind(SymbolKind::Polynomial(vec![1.0, -1.0]))
    }

    /// Wraps an arbitrary function. `f(0)` must vanish and `holder_exponent`
    /// is the Hölder exponent of `f` at both endpoints.
    pub fn custom<F>(label: impl Into<String>, holder_exponent: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(holder_exponent > 0.0 && holder_exponent <= 1.0) {
            return Err(Error::validation(format!(
                "Hölder exponent must lie in (0, 1], got {holder_exponent}"
            )));
        }
        let at_zero = f(0.0);
        if at_zero.abs() > 1e-12 {
            return Err(Error::validation(format!("custom symbol has f(0) = {at_zero}, expected 0")));
        }
        let custom = CustomSymbol { label: label.into(), holder_exponent, eval: Arc::new(f) };
        Ok(Self::from_kind(SymbolKind::Custom(custom)))
    }

    fn from_kind(kind: SymbolKind) -> Self {
        let mut symbol = Self { kind, value_at_one: 0.0, closed_form_i: None };
        symbol.value_at_one = symbol.eval(1.0);
        symbol.closed_form_i = closed_form_i(&symbol);
        symbol
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn value_at_one(&self) -> f64 {
        self.value_at_one
    }

    pub fn closed_form_i(&self) -> Option<f64> {
        self.closed_form_i
    }

    /// Evaluates the symbol on `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match &self.kind {
            SymbolKind::Monomial(m) => t.powi(*m as i32),
            SymbolKind::Polynomial(c) => t * horner(c, t),
            SymbolKind::Renyi(gamma) => renyi(*gamma, t),
            SymbolKind::Custom(c) => (c.eval)(t),
        }
    }

    /// `f(1 - s)`, accurate for tiny `s` where the symbol allows it.
    fn eval_complement(&self, s: f64) -> f64 {
        match &self.kind {
            SymbolKind::Renyi(gamma) => renyi_pair(*gamma, 1.0 - s, s),
            _ => self.eval(1.0 - s),
        }
    }

    /// Hölder exponent of the `𝖨` integrand's numerator at the endpoints.
    fn holder_exponent(&self) -> f64 {
        match &self.kind {
            SymbolKind::Monomial(_) | SymbolKind::Polynomial(_) => 1.0,
            SymbolKind::Renyi(gamma) => gamma.min(1.0),
            SymbolKind::Custom(c) => c.holder_exponent,
        }
    }

    /// Coefficients of `t, t², …` when the symbol is a polynomial.
    pub fn polynomial_coefficients(&self) -> Option<Vec<f64>> {
        match &self.kind {
            SymbolKind::Monomial(m) => {
                let mut c = vec![0.0; *m as usize];
                c[*m as usize - 1] = 1.0;
                Some(c)
            }
            SymbolKind::Polynomial(c) => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        match &self.kind {
            SymbolKind::Monomial(1) => true,
            SymbolKind::Polynomial(c) => c[0] == 1.0 && c[1..].iter().all(|&x| x == 0.0),
            _ => false,
        }
    }
}

fn horner(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

impl fmt::Display for SymbolFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SymbolKind::Monomial(m) => write!(f, "m{m}"),
            SymbolKind::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            SymbolKind::Renyi(g) => write!(f, "h{g}"),
            SymbolKind::Custom(c) => write!(f, "custom:{}", c.label),
        }
    }
}

/// Parses `m<k>`, `poly:c1,c2,...` (coefficients of `t, t², ...`) and `h<γ>`.
impl FromStr for SymbolFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::validation(format!("unrecognized symbol spec '{s}'"));
        if let Some(rest) = s.strip_prefix("poly:") {
            let coeffs = rest
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            SymbolFunction::polynomial(coeffs)
        } else if let Some(rest) = s.strip_prefix('m') {
            SymbolFunction::monomial(rest.parse().map_err(|_| bad())?)
        } else if let Some(rest) = s.strip_prefix('h') {
            SymbolFunction::renyi(rest.parse().map_err(|_| bad())?)
        } else {
            Err(bad())
        }
    }
}

/// Closed form of `𝖨(f)` where one is known: monomials, polynomials and
/// Rényi entropies.
pub fn closed_form_i(f: &SymbolFunction) -> Option<f64> {
    match &f.kind {
        SymbolKind::Monomial(m) => Some(monomial_i(*m)),
        SymbolKind::Polynomial(c) => {
            Some(c.iter().enumerate().map(|(k, ck)| ck * monomial_i(k as u32 + 1)).sum())
        }
        SymbolKind::Renyi(gamma) => Some((1.0 + gamma) / (24.0 * gamma)),
        SymbolKind::Custom(_) => None,
    }
}

fn monomial_i(m: u32) -> f64 {
    let harmonic: f64 = (1..m).map(|r| 1.0 / r as f64).sum();
    -harmonic / (4.0 * PI * PI)
}

/// Panel budget for the adaptive 𝖨 quadrature.
const MAX_PANELS: usize = 20_000;
/// Deepest dyadic level toward each endpoint; `2^-200` is far below any tolerance.
const MAX_DYADIC_LEVEL: i32 = 200;

/// `𝖨(f) = (1/4π²) ∫₀¹ (f(t) - t f(1)) / (t(1-t)) dt` with absolute error
/// at most `tol`.
///
/// Each half of `[0,1]` is covered by dyadic panels `[2^{-k-1}, 2^{-k}]`
/// (measured from the nearest endpoint), each refined adaptively. The
/// uncovered tail `[0, δ]` is bounded by `δ |g(δ)| / β` for an integrand
/// behaving like `t^{β-1}`; levels are added until that bound fits the
/// tolerance.
pub fn i_functional(f: &SymbolFunction, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    let scale = 1.0 / (4.0 * PI * PI);
    // work in the unscaled integral
    let tol = tol / scale;
    let f1 = f.value_at_one();
    let beta = f.holder_exponent();
    let left = |t: f64| {
        let (num, den) = (f.eval(t) - t * f1, t * (1.0 - t));
        (num / den, (f.eval(t).abs() + (t * f1).abs()) / den)
    };
    let right = |s: f64| {
        let t = 1.0 - s;
        let fc = f.eval_complement(s);
        ((fc - t * f1) / (t * s), (fc.abs() + (t * f1).abs()) / (t * s))
    };
    let mut integrator = AdaptiveGauss::new(tol / 8.0);
    let a = integrator.dyadic_half(&left, beta, tol / 4.0)?;
    let b = integrator.dyadic_half(&right, beta, tol / 4.0)?;
    Ok(scale * (a + b))
}

struct AdaptiveGauss {
    coarse: GaussRule,
    fine: GaussRule,
    panel_tol: f64,
    panels_used: usize,
}

impl AdaptiveGauss {
    fn new(total_tol: f64) -> Self {
        Self {
            coarse: GaussRule::new(10),
            fine: GaussRule::new(20),
            panel_tol: total_tol,
            panels_used: 0,
        }
    }

    /// Integral of `g` over `(0, 1/2]` in the distance-to-endpoint variable.
    ///
    /// `g` returns the integrand together with the magnitude of the terms
    /// that cancel in it, which sets the roundoff floor per panel.
    fn dyadic_half<G: Fn(f64) -> (f64, f64)>(&mut self, g: &G, beta: f64, tail_tol: f64) -> Result<f64> {
        let mut sum = 0.0;
        let mut hi = 0.5;
        for level in 1..=MAX_DYADIC_LEVEL {
            let lo = 0.5 * hi;
            // later levels are smaller; share the tolerance geometrically
            let tol = self.panel_tol * 0.5f64.powi(level.min(40));
            sum += self.adaptive(g, lo, hi, tol, 0)?;
            hi = lo;
            let tail = hi * g(hi).0.abs() / beta;
            if tail < tail_tol && level >= 8 {
                return Ok(sum);
            }
        }
        Err(Error::Numeric {
            message: "endpoint tail did not fall below tolerance".into(),
            estimate: sum,
        })
    }

    fn adaptive<G: Fn(f64) -> (f64, f64)>(
        &mut self,
        g: &G,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        self.panels_used += 1;
        let coarse = self.coarse.integrate(a, b, |x| g(x).0);
        let fine = self.fine.integrate(a, b, |x| g(x).0);
        let floor = 256.0 * f64::EPSILON * self.fine.integrate(a, b, |x| g(x).1);
        if !fine.is_finite() {
            return Err(Error::Numeric {
                message: format!("non-finite integrand on [{a:e}, {b:e}]"),
                estimate: f64::NAN,
            });
        }
        if (fine - coarse).abs() <= tol.max(floor) || depth >= 40 {
            return Ok(fine);
        }
        if self.panels_used > MAX_PANELS {
            return Err(Error::Numeric {
                message: format!("adaptive quadrature exhausted {MAX_PANELS} panels"),
                estimate: fine,
            });
        }
        let mid = 0.5 * (a + b);
        let left = self.adaptive(g, a, mid, 0.5 * tol, depth + 1)?;
        let right = self.adaptive(g, mid, b, 0.5 * tol, depth + 1)?;
        Ok(left + right)
    }
}
