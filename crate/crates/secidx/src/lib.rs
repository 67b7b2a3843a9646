//! Exact-arithmetic workbench for secure index coding rate regions.
//!
//! The pipeline: describe a problem instance (receivers with side information
//! plus an eavesdropper), build outer-bound and inner-bound constraint systems
//! over auxiliary set-function or composite-rate variables, project them onto
//! the rate coordinates with Fourier-Motzkin elimination, and compare the
//! resulting polyhedra. Everything runs over exact rationals; there is no
//! floating point anywhere in the kernel.

pub mod analysis;
pub mod cli;
pub mod inner_bounds;
pub mod model;
pub mod outer_bounds;
pub mod polyhedra;
