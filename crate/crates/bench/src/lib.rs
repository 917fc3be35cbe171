//! Shared fixtures for the benchmarks.

use nonlocalflow::verify::suites::{asymmetric_curve, muskat_family};
use nonlocalflow::{PeriodicField, PeriodicGrid};

/// Grid sizes exercised by every size-parametrized benchmark.
pub const SIZES: [usize; 3] = [64, 128, 256];

pub fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::standard(n).expect("power-of-two grid")
}

/// Smooth seeded graph with a moderate slope.
pub fn muskat_state(n: usize) -> PeriodicField {
    muskat_family(&grid(n), 1).expect("seeded Muskat data")
}

/// Non-circular closed curve with a nonconstant stretching.
pub fn peskin_state(n: usize) -> PeriodicField {
    asymmetric_curve(&grid(n))
}
