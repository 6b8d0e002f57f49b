pub mod bounds;
pub mod counterexample;
pub mod ee3d;
pub mod geometry;
pub mod trace1d;

use fermi_ee::spectral::GridPolicy;
use fermi_ee::SymbolFunction;

use crate::error::CliError;

pub fn grid_policy(npw: Option<f64>, matrix_cap: Option<usize>) -> GridPolicy {
    let d = GridPolicy::default();
    GridPolicy {
        nodes_per_wavelength: npw.unwrap_or(d.nodes_per_wavelength),
        matrix_cap: matrix_cap.unwrap_or(d.matrix_cap),
        ..d
    }
}

pub fn parse_symbol(spec: &str) -> Result<SymbolFunction, CliError> {
    spec.parse::<SymbolFunction>()
        .map_err(|e| CliError::Usage(format!("symbol: {e}")))
}

pub fn require_scales(scales: &[f64]) -> Result<(), CliError> {
    if scales.is_empty() {
        return Err(CliError::Usage("L: at least one scale is required".into()));
    }
    if let Some(l) = scales.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(CliError::Usage(format!("L: scales must be positive, got {l}")));
    }
    Ok(())
}
