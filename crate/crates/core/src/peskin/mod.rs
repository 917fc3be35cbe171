//! Elastic membrane in Stokes flow: tension laws, boundary-integral velocity,
//! its Hilbert-split and half-order decompositions, and circle diagnostics.

pub mod circle;
pub mod ops;
pub mod tension;

pub use circle::{
    decay_diagnostic, project_circle_space, CircleProjection, DecayReport, PeskinInitial,
};
pub use ops::{
    coeff_eigenvalues, coeff_matrix_a, decomposition_check, half_order_check,
    nonlinearity_script_n, principal_term, remainder_m, rhs_contour, rhs_split, stokeslet,
    tension_flux, two_path_check, PeskinState, DEFAULT_REFINE, HALF_LAPLACIAN_CONSTANT,
};
pub use tension::{TensionBounds, TensionLaw};
