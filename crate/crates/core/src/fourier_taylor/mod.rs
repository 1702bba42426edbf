//! Sparse Fourier–Taylor series in action–angle variables.
//!
//! A series is a finite sum `Σ c_{m,k} p^m e^{i k·q}` with complex
//! coefficients, stored with both members of every `±k` pair so that it
//! represents a real function. The module provides the algebra needed by the
//! normalization (products, Poisson brackets, Lie series, averages, grade
//! projections) and the weighted Fourier norm used by all estimates.

mod eval;
mod index;
mod json;
mod ops;
mod series;

pub use eval::Evaluator;
pub use index::{format_wave, MultiIndex, Powers, Wave};
pub use ops::{
    lie_derivative, lie_series_apply, lie_series_weighted, multiply, poisson_bracket, LieSeries, Truncated, Truncation,
    TruncationPolicy,
};
pub use series::{index, DomainParams, FourierTaylor};

pub(crate) use ops::factorial;
