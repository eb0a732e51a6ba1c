//! Cut-and-project quasicrystals, bounded remainder sets, discrepancy of
//! irrational rotations and finite-section Riesz-bound diagnostics for
//! exponential systems.

pub mod algebra;
pub mod regions;
pub mod lattice;
pub mod modelset;
pub mod dynamics;
pub mod riesz;
