//! Normalization steps, the driver with its outer detuning fixed point, and
//! the composed canonical transformation.

mod driver;
mod state;
mod step;
mod transform;

pub use driver::{run_normalization, NormalFormResult, RunParams};
pub use state::{HamiltonianState, PartBound, Residual};
pub use step::{normalization_step, GeneratorPair, StepDiagnostics, StepOutcome};
pub use transform::{transform_point, CanonicalTransform, Direction};
