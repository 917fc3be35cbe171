//! Pseudo-spectral simulation and verification laboratory for nonlocal
//! quasilinear parabolic equations on the one-dimensional torus.
//!
//! Modules, bottom-up:
//!
//! * [`spectral`]: periodic grids, FFT-backed Fourier multipliers, spectral
//!   shifts and principal-value quadrature on a half-offset lattice.
//! * [`norms`]: Hölder and Besov estimators, arc-chord constant and
//!   time-weighted diagnostic traces.
//! * [`kernels`]: frozen-coefficient fundamental solutions of matrix symbols,
//!   their bound checks and a Duhamel evolver.
//! * [`muskat`]: the Muskat equation with surface tension in contour and
//!   parabolic form.
//! * [`peskin`]: the 2D Peskin problem in boundary-integral and
//!   Hilbert-transform form.
//! * [`evolve`]: IMEX, RK4 and Picard integrators plus scripted experiments.
//! * [`verify`]: invariant suites shared by the CLI and the acceptance tests.

// `!(x > 0.0)` guards reject NaN as well; index loops mirror the discrete formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod kernels;
pub mod muskat;
pub mod norms;
pub mod peskin;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use spectral::{PeriodicField, PeriodicGrid};
