//! Frozen-coefficient fundamental solutions: Fourier-space ODE, bound checks,
//! physical-space kernels and a Duhamel evolver.

pub mod bounds;
pub mod duhamel;
pub mod physical;
pub mod symbol;
pub mod table;

pub use bounds::{
    check_derivative_bound, check_exp_bound, derivative_bound_stability, BoundReport,
};
pub use duhamel::{duhamel_evolve, duhamel_trajectory};
pub use physical::{
    decay_fit, gradient_l1, kernel_l1, kernel_physical, l1_scaling_spread, DecayFit, PhysicalKernel,
};
pub use symbol::{SymbolFamily, SymbolSpec};
pub use table::{expm, grid_wavenumbers, solve_kernel_fourier, KernelOptions, KernelTable};
