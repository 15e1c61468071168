//! Hamilton-Jacobi formulations of free Maxwell theory: the covariant
//! polymomentum equation, the canonical functional equation on a periodic
//! lattice, and a numerical audit of the spacetime split between them.

// tensor components are indexed the way they are written on paper
#![allow(clippy::needless_range_loop)]

pub mod audit;
pub mod cli;
pub mod convergence;
pub mod eikonal;
pub mod error;
pub mod exprs;
pub mod fields;
pub mod minkowski;
pub mod report;
pub mod scenario;
pub mod splitting;

pub use eikonal::{characteristics_evolve, trajectory_maxwell_residual, EikonalAnsatz, PotentialPolynomial};
pub use audit::{audit_refinement, run_audit, AuditOptions, AuditReport, Status, StepRecord, ToleranceClass};
pub use convergence::{ConvergenceStudy, ORDER_BOUNDS};
pub use error::{Error, Result};
pub use exprs::{Phase, ScalarExpr};
pub use fields::{
    fdtd_step, gauss_divergence, pairwise_sum, spatial_field_strength, FieldConfiguration, Lattice,
    LatticeMeta, MaxwellState, SpacetimeSolution, SpatialFieldStrength,
};
pub use minkowski::{Conventions, Rank2, MAX_DIM};
pub use scenario::Scenario;
pub use splitting::{canonical_hamiltonian, canonical_momenta, CanonicalHamiltonian, CanonicalHjResidual, SplitFunctional};
