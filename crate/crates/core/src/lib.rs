//! Selectively balancing families of unit vectors.
//!
//! A family `u_1, …, u_m` of unit vectors is *selectively balancing* when some
//! non-trivial `eps ∈ {-1, 0, 1}^m` makes `||sum eps_i u_i|| < 1`. This crate
//! builds families that are not, decides the property exactly for small
//! families, and brackets the least `m` that forces it in `R^n`.

pub mod bounds;
pub mod construction;
pub mod error;
pub mod geometry;
pub mod instance;
pub mod interval;
pub mod solver;
pub mod vectorspace;

pub use bounds::{
    binomial_volume_bound_holds, prop1_condition, prop1_threshold, shell_pigeonhole_bound,
    sigma_bracket, SigmaBracket,
};
pub use construction::{
    build_instance, figure_example, nested_subsets, plan_parameters, ConstructionParams, LevelZero,
    PlannedParameters,
};
pub use error::{Check, Error, Result};
pub use geometry::{
    find_shell, is_strictly_convex, lonely_points, lonely_witness_for, LatticeShell, Point,
    PointSet,
};
pub use instance::{parse_family, parse_instance, write_family, Instance};
pub use solver::{Method, ProofTrace, Verdict, VerdictReport};
pub use vectorspace::{
    combine, coordinate_index, is_balancing_witness, ScaledVector, SignVector, UnitVectorFamily,
};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
