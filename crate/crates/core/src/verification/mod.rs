//! Independent checks of a normalization run: residuals, orbit integration
//! of the detuned original system against the quasi-periodic flow on the
//! constructed torus, deformation size and canonicity of the transform.

mod integrator;
mod torus;

pub use integrator::{
    advance_angle, angle_difference, integrate_orbit, wrap_angle, HamiltonianField, IntegratorOptions, Scheme,
    Trajectory,
};
pub use torus::{
    deformation_check, detuned_hamiltonian, normal_form_residual, normalized_action_drift, round_trip_error,
    sample_phases, symplectic_defect, symplecticity_check, torus_residual, ActionDrift, DeformationReport,
    SampleDeviation, TorusOptions, TorusReport,
};
