//! Eigenvalue counting for `H = Δ + V` on the model spaces.
//!
//! Everything reduces to one-dimensional problems discretised as symmetric
//! tridiagonal matrices (or tridiagonal pencils), whose eigenvalue counts
//! below `λ` are exact integers from the inertia of `A − λB`.

mod bracketing;
mod counting;
mod pointwise;
mod tridiagonal;

pub use bracketing::{dn_bracket, DnReport};
pub use counting::{
    agmon_distance, agmon_distance_fn, channel_minimum, count, count_cylinder, count_hyperbolic3,
    count_line, counting_function, Bracket, CountSample, CountingFunction, MeshControl,
};
pub use pointwise::{
    agmon_tail_mass, pointwise_counting, Eigendecomposition, TailReport, DENSE_LIMIT,
};
pub use tridiagonal::{
    discretize_1d, discretize_with, sturm_count, BoundaryCondition, Stencil, TridiagonalOperator,
};
