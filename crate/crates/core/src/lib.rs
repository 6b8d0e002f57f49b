//! Numerics for traces of functions of spatially truncated Fermi projections.
//!
//! The one-dimensional building block is the sine-kernel projection
//! `1_Ω 1[(-i∇)² ≤ μ] 1_Ω` on a finite union of intervals, discretized by a
//! symmetric Nyström scheme. Three-dimensional magnetic traces are reduced
//! to planar integrals of these one-dimensional traces, one per occupied
//! Landau level.

pub mod asymptotics;
pub mod counterexample;
pub mod error;
pub mod functional;
pub mod intervals;
pub mod quadrature;
pub mod reduction;
pub mod regions;
pub mod spectral;

pub use error::{Error, Result};
pub use functional::SymbolFunction;
pub use intervals::IntervalUnion;
