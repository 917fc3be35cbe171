//! Periodic grids, Fourier multipliers and singular-integral quadrature.

mod field;
mod grid;
pub mod ops;
pub mod pv;

pub use field::{evaluate_series, PeriodicField};
pub use grid::PeriodicGrid;
pub use ops::{
    dealias, derivative, finite_difference, fractional_laplacian, hilbert_transform, shift,
    slope_difference, MultiplierOp,
};
pub use pv::{pv_quadrature, OffsetLattice, PvKernel, Sample, ShiftTable};
