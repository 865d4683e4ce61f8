//! Mesh-free multi-network solver for the two-phase Stefan problem in a finned
//! phase-change storage cell, together with the classical reference solvers used to check it.

pub mod autodiff;
pub mod io;
pub mod networks;
pub mod oracles;
pub mod physics;
pub mod sampling;
pub mod training;
