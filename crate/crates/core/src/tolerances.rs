//! Numerical thresholds shared across modules.

/// Largest imaginary part tolerated when evaluating a series at a real point,
/// relative to the sum of term magnitudes.
pub const IMAGINARY_RESIDUE: f64 = 1e-12;

/// A divisor `|k·ω|` below this multiple of `|k|` is treated as an exact
/// resonance; floating-point cancellation cannot be told apart from zero.
pub const RESONANCE_GUARD: f64 = 1e-13;

/// A right-hand side passed to the homological solver may carry an angle
/// average no larger than this.
pub const AVERAGE_RESIDUE: f64 = 1e-14;

/// Step size of the central differences in the symplecticity check.
pub const SYMPLECTIC_FD_STEP: f64 = 1e-6;

/// A torus certificate passes when the orbit deviation stays below this
/// multiple of `residual_floor · T`.
pub const TORUS_DEVIATION_FACTOR: f64 = 100.0;

/// Deviation accepted regardless of the floor; covers runs whose residual is
/// exactly zero, where only integration error remains.
pub const TORUS_ABSOLUTE_FLOOR: f64 = 1e-10;

/// Relative energy drift above which the integrator, not the torus, is in
/// question.
pub const ENERGY_DRIFT_LIMIT: f64 = 1e-10;

pub const SYMPLECTIC_DEFECT_LIMIT: f64 = 1e-6;

pub const ROUND_TRIP_LIMIT: f64 = 1e-10;
