//! Optimal potentials for the Schrödinger operator −Δ + V.
//!
//! Computes nonnegative potentials that optimize the Dirichlet energy or the
//! low Dirichlet eigenvalues on an interval or a radially symmetric domain,
//! subject to integral constraints ∫V^p ≤ 1, ∫V^{−p} ≤ 1 or ∫e^{−αV} ≤ 1.
//! The optimizers work on auxiliary convex functionals of the state u alone;
//! the potential is then recovered in closed form, and a set of verification
//! experiments checks duality, constraint saturation, compact support and
//! decay of the optimizers at desk scale.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod optimize;
pub mod problem;
pub mod recover;
pub mod functionals;
pub mod operators;

pub use error::Error;
pub use grid::{integrate, make_interval, make_radial, Field, Grid, GridKind, CLAMP};
pub use operators::{
    apply_operator, eigenpairs, energy_of_potential, solve_linear, torsion, Spectrum,
    TridiagonalSystem,
};
pub use functionals::{check_admissible_q, ConstraintSpec, FunctionalKind};
pub use problem::{solve, DomainSpec, Objective, ProblemSpec, SolveResult, SourceKind};
