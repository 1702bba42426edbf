//! Kolmogorov normal form with a frequency knob.
//!
//! Given a near-integrable Hamiltonian `H = ω₀·p + Σ_l h_l(p, q)` and a
//! target Diophantine frequency `ω`, the engine builds the sequence of Lie
//! transforms that brings `H` to the form `ω·p + O(p²)`, determining the
//! starting frequency `ω₀ = ω + δω⁽⁰⁾` a posteriori instead of translating
//! the actions. Around it sit the quantitative constants of the convergence
//! proof and an independent numerical certificate of the invariant torus.

// `!(x > 0.0)` rejects NaN as well; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod estimates;
pub mod fourier_taylor;
pub mod homological;
pub mod normalizer;
pub mod output;
pub mod pipeline;
pub mod presets;
pub mod tolerances;
pub mod verification;

pub use config::{ConfigError, ResolvedConfig, RunConfig};
pub use error::{EstimateError, HomologicalError, NormalizeError, SeriesError, VerifyError};
pub use fourier_taylor::{DomainParams, FourierTaylor, MultiIndex, TruncationPolicy};
pub use homological::{check_diophantine, solve_homological, DiophantineFrequency, DiophantineReport};
pub use normalizer::{run_normalization, GeneratorPair, HamiltonianState, NormalFormResult, RunParams};
