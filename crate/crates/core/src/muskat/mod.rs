//! Muskat interface with surface tension: contour form, parabolic
//! reformulation, nonlinearities and initial data.

pub mod diagnostic;
pub mod initial;
pub mod rhs;

pub use diagnostic::{nonlinear_estimate_diagnostic, regularity_norm, NonlinearReport};
pub use initial::{Mode, MuskatInitial};
pub use rhs::{
    coefficient_forcing, curvature, inv_bracket_cubed, nonlinearity_parts, rhs_original,
    rhs_reformulated, MuskatRhs, MuskatState, DEFAULT_REFINE,
};
