//! Solver and verification kernels for `det D²u = h / ∏ lᵢ` on simple convex
//! polytopes with the Guillemin boundary behaviour `u − Σ lᵢ ln lᵢ` smooth up
//! to the boundary.
//!
//! The crate is `no_std` (with `alloc`). File formats, threading and the
//! command line live in the `gma` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boundary;
pub mod estimates;
pub mod grid;
pub mod guillemin;
pub mod legendre;
pub mod linalg;
pub mod math;
pub mod polytope;
pub mod quadrature;
pub mod solver;

pub use boundary::{build_boundary_data, newton_solve, restrict_problem, solve_edge, BoundaryData, EdgeProfile, GuilleminProblem};
pub use grid::{GridChart, GridField};
pub use guillemin::{guillemin_density, guillemin_potential, Density};
pub use polytope::{build_polytope, AffineFunctional, FaceChart, Polytope};
pub use solver::{RegularizedSolution, SolveOptions, SolveReport};
