//! Evolving-surface finite element simulation of diffuse-interface two-phase
//! flow: tangential Navier-Stokes coupled to a convective Cahn-Hilliard
//! equation with a logarithmic potential and unmatched densities, on a
//! closed surface moving with a prescribed normal velocity.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration
//! parsing and the command line live in the `surfflow` companion crate.
//!
//! Layout:
//!
//! - [`mesh`]: triangulated surfaces, geometry recovery, normal evolution.
//! - [`calculus`]: P1 operators, Poisson solves, transport identity checks.
//! - [`material`]: logarithmic potential, viscosity and density laws.
//! - [`cahn_hilliard`]: one implicit phase-field step and its diagnostics.
//! - [`navier_stokes`]: lift of the normal motion and the momentum step.
//! - [`sim`]: the coupled time loop and its energy ledger.
//! - [`linalg`]: sparse matrices and the linear solvers used throughout.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` is how NaN is routed into the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod cahn_hilliard;
pub mod calculus;
mod error;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod navier_stokes;
pub mod sim;
mod vec3;

pub use error::{Error, Result};
pub use vec3::{Mat3, Vec3};
