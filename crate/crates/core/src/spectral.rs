//! Nyström discretization of the truncated sine-kernel projection.
//!
//! On a union `Ω` of intervals the operator `1_Ω 1[(-i∇)² ≤ μ] 1_Ω` has the
//! kernel `k_μ(x - y)`. With composite Gauss–Legendre nodes `x_i` and weights
//! `w_i` we use the symmetric matrix `A_ij = √(w_i w_j) k_μ(x_i - x_j)`,
//! whose spectrum approximates that of the operator and lies in `[0, 1]` up
//! to discretization error.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self_adjoint_evd, self_adjoint_evd_scratch, ComputeEigenvectors};
use faer::diag::Diag;
use faer::{Mat, Par};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{sine_kernel, SymbolFunction};
use crate::intervals::IntervalUnion;
use crate::quadrature::GaussRule;

pub const DEFAULT_NODES_PER_WAVELENGTH: f64 = 8.0;
pub const DEFAULT_MIN_NODES_PER_INTERVAL: usize = 16;
pub const DEFAULT_PANEL_ORDER: usize = 16;
pub const DEFAULT_MATRIX_CAP: usize = 6000;
/// Tolerated spectral leakage outside `[0, 1]` at default resolution.
pub const SPECTRAL_LEAKAGE_TOL: f64 = 1e-6;

/// How densely intervals are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub nodes_per_wavelength: f64,
    pub min_nodes_per_interval: usize,
    pub panel_order: usize,
    pub matrix_cap: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            nodes_per_wavelength: DEFAULT_NODES_PER_WAVELENGTH,
            min_nodes_per_interval: DEFAULT_MIN_NODES_PER_INTERVAL,
            panel_order: DEFAULT_PANEL_ORDER,
            matrix_cap: DEFAULT_MATRIX_CAP,
        }
    }
}

impl GridPolicy {
    pub fn with_nodes_per_wavelength(mut self, npw: f64) -> Self {
        self.nodes_per_wavelength = npw;
        self
    }

    /// Nodes per unit length for Fermi level `mu`.
    pub fn density(&self, mu: f64) -> f64 {
        self.nodes_per_wavelength * mu.sqrt() / (2.0 * PI)
    }

    /// Number of nodes placed on an interval of length `len`.
    pub fn nodes_for_length(&self, mu: f64, len: f64) -> usize {
        let requested = (self.density(mu) * len).ceil() as usize;
        let n = requested.max(self.min_nodes_per_interval).max(1);
        n.div_ceil(self.panel_order) * self.panel_order
    }

    /// Matrix dimension for `omega` at Fermi level `mu`.
    pub fn matrix_size(&self, omega: &IntervalUnion, mu: f64) -> usize {
        omega.intervals().iter().map(|(l, r)| self.nodes_for_length(mu, r - l)).sum()
    }

    fn validate(&self) -> Result<()> {
        if !(self.nodes_per_wavelength >= 4.0) {
            return Err(Error::domain(format!(
                "nodes_per_wavelength must be >= 4, got {}",
                self.nodes_per_wavelength
            )));
        }
        if self.panel_order == 0 {
            return Err(Error::domain("panel order must be >= 1"));
        }
        Ok(())
    }
}

/// Composite Gauss–Legendre nodes on every interval of a union.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Index of the first node of each interval, plus a final sentinel.
    pub interval_offsets: Vec<usize>,
    pub nodes_per_unit: f64,
}

impl QuadratureGrid {
    pub fn build(omega: &IntervalUnion, mu: f64, policy: &GridPolicy) -> Self {
        let rule = GaussRule::new(policy.panel_order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut interval_offsets = vec![0];
        for &(l, r) in omega.intervals() {
            let panels = policy.nodes_for_length(mu, r - l) / policy.panel_order;
            let h = (r - l) / panels as f64;
            for p in 0..panels {
                let a = l + h * p as f64;
                let b = if p + 1 == panels { r } else { a + h };
                rule.map_into(a, b, &mut nodes, &mut weights);
            }
            interval_offsets.push(nodes.len());
        }
        Self { nodes, weights, interval_offsets, nodes_per_unit: policy.density(mu) }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The symmetric Nyström matrix of the truncated projection.
#[derive(Debug)]
pub struct DiscretizedProjection {
    matrix: Mat<f64>,
    grid: QuadratureGrid,
    mu: f64,
    eigenvalues: OnceLock<std::result::Result<Vec<f64>, Error>>,
}

/// Assembles the Nyström matrix for `omega` at Fermi level `mu`.
pub fn build_projection(
    omega: &IntervalUnion,
    mu: f64,
    policy: &GridPolicy,
) -> Result<DiscretizedProjection> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::domain(format!("Fermi level mu must be > 0, got {mu}")));
    }
    policy.validate()?;
    let n = policy.matrix_size(omega, mu);
    if n > policy.matrix_cap {
        return Err(Error::Resource(format!(
            "Nyström matrix of size {n} exceeds cap {} (Omega with {} interval(s), measure {:.6}, span [{:.6}, {:.6}], mu = {mu})",
            policy.matrix_cap,
            omega.len(),
            omega.measure(),
            omega.intervals().first().map_or(0.0, |iv| iv.0),
            omega.intervals().last().map_or(0.0, |iv| iv.1),
        )));
    }
    let grid = QuadratureGrid::build(omega, mu, policy);
    let matrix = assemble(&grid, mu);
    Ok(DiscretizedProjection { matrix, grid, mu, eigenvalues: OnceLock::new() })
}

fn assemble(grid: &QuadratureGrid, mu: f64) -> Mat<f64> {
    let n = grid.len();
    let sqrt_mu = mu.sqrt();
    let root_w: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = root_w[i] * root_w[j] * sine_kernel(sqrt_mu, grid.nodes[i] - grid.nodes[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

impl DiscretizedProjection {
    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Sum of diagonal entries, i.e. `(√μ/π) Σ w_i`.
    pub fn matrix_trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `tr A² = ‖A‖_F²`, computed from the entries.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += self.matrix[(i, j)] * self.matrix[(i, j)];
            }
        }
        acc
    }

    /// Full spectrum in nondecreasing order, computed once and cached.
    ///
    /// Values are reported raw; clamping to `[0, 1]` happens in
    /// [`trace_functional`].
    pub fn eigenvalues(&self) -> Result<&[f64]> {
        self.eigenvalues
            .get_or_init(|| symmetric_eigenvalues(&self.matrix))
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }
}

/// Dense symmetric eigenvalues, sequential so results do not depend on the
/// thread pool.
pub fn symmetric_eigenvalues(matrix: &Mat<f64>) -> Result<Vec<f64>> {
    let n = matrix.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let par = Par::Seq;
    let mut s = Diag::<f64>::zeros(n);
    let mut buf = MemBuffer::new(self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::No,
        par,
        Default::default(),
    ));
    self_adjoint_evd(
        matrix.as_ref(),
        s.as_mut(),
        None,
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numeric {
        message: format!("symmetric eigensolver failed: {e:?}"),
        estimate: f64::NAN,
    })?;
    let mut values: Vec<f64> = s.column_vector().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Spectrum of `P` (alias for [`DiscretizedProjection::eigenvalues`]).
pub fn eigenvalues(p: &DiscretizedProjection) -> Result<&[f64]> {
    p.eigenvalues()
}

/// `Σ_i f(clamp(λ_i, 0, 1))`.
pub fn trace_functional(p: &DiscretizedProjection, f: &SymbolFunction) -> Result<f64> {
    Ok(trace_of_spectrum(p.eigenvalues()?, f))
}

pub fn trace_of_spectrum(eigenvalues: &[f64], f: &SymbolFunction) -> f64 {
    eigenvalues.iter().map(|&l| f.eval(l.clamp(0.0, 1.0))).sum()
}

/// Extremes of a spectrum, used for leakage diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRange {
    pub min: f64,
    pub max: f64,
}

impl SpectralRange {
    pub fn of(eigenvalues: &[f64]) -> Option<Self> {
        Some(Self { min: *eigenvalues.first()?, max: *eigenvalues.last()? })
    }

    pub fn within(&self, eps: f64) -> bool {
        self.min >= -eps && self.max <= 1.0 + eps
    }

    pub fn merge(self, other: Self) -> Self {
        Self { min: self.min.min(other.min), max: self.max.max(other.max) }
    }
}

/// Writes one eigenvalue per line.
pub fn write_spectrum_csv<W: Write>(mut out: W, eigenvalues: &[f64]) -> std::io::Result<()> {
    for l in eigenvalues {
        writeln!(out, "{l:e}")?;
    }
    Ok(())
}

/// Everything the callers usually need from one 1D spectral run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub trace: f64,
    pub dim: usize,
    pub range: Option<SpectralRange>,
}

/// Builds, diagonalizes and reduces in one call.
pub fn trace_1d(
    omega: &IntervalUnion,
    mu: f64,
    f: &SymbolFunction,
    policy: &GridPolicy,
) -> Result<TraceSample> {
    let p = build_projection(omega, mu, policy)?;
    let eig = p.eigenvalues()?;
    Ok(TraceSample { trace: trace_of_spectrum(eig, f), dim: p.dim(), range: SpectralRange::of(eig) })
}
