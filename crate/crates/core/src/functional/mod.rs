//! Special functions, entropy symbols and the linear functional `𝖨`.

mod bessel;
mod bound;
mod special;
mod symbol;

pub use bessel::bessel_k0;
pub use bound::{convolution_bound_check, BoundCheckResult, MAX_BOUND_ORDER};
pub use special::{
    landau_kernel_eval, laguerre_eval, sine_kernel_eval, MAX_LAGUERRE_DEGREE,
};
pub(crate) use special::sine_kernel;
pub use symbol::{
    closed_form_i, entropy_h, i_functional, CustomSymbol, SymbolFunction, SymbolKind,
    ENTROPY_DOMAIN_SLACK,
};
