//! Numerical laboratory for eigenvalue counting functions of Schrödinger
//! operators `H = Δ + V` on model geometries.
//!
//! The crate is organised by role:
//!
//! * [`models`] — model geometries (line, radial ℝⁿ, cylinder ℝ×S¹, hyperbolic
//!   3-space) and confining potential families.
//! * [`phase`] — classical phase-space quantities: sublevel volumes `σ(λ)` and
//!   the Weyl integral `Φ(λ)`.
//! * [`invariants`] — the growth scale `a(λ)`, `d_δ(λ)`, the oscillation radius
//!   `b_δ(λ)`, curvature weight `K_δ` and the criterion `c_δ(λ)`.
//! * [`spectral`] — tridiagonal discretisations, exact Sturm counts,
//!   Dirichlet–Neumann bracketing and channel sums.
//! * [`heatkernel`] — parametrix, exact H³ kernel and spectral kernels.
//! * [`tauberian`] — Laplace–Stieltjes transforms of monotone measures and the
//!   quantitative Tauberian checks.
//! * [`experiments`] — end-to-end experiment runners used by the CLI.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod heatkernel;
pub mod invariants;
pub mod models;
pub mod phase;
pub mod quadrature;
pub mod spectral;
pub mod tauberian;

pub use error::{Error, Result};
pub use invariants::{InvariantReport, TrendVerdict};
pub use models::{GeometryKind, GeometryModel, Normalization, PotentialFamily, PotentialModel};
pub use phase::QuadratureSettings;
pub use spectral::{Bracket, CountingFunction, MeshControl, Stencil, TridiagonalOperator};
pub use tauberian::{MonotoneMeasure, TauberianVerdict};
