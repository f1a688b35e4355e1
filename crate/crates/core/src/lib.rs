//! Evolution families on the unit ball of C^2 at desk scale.
//!
//! The crate models normalized vector fields whose flows contract the ball
//! (class M), integrates the associated evolution equation pointwise and
//! coefficientwise, forms parametric-representation limits, and reproduces
//! the sharp coefficient bounds for the pure `z1^m` and `z2^m` directions
//! together with their extremal fields.
//!
//! Module map:
//! - [`series`]: truncated bivariate power series and maps, the substrate.
//! - [`herglotz`]: class-M fields, sampled membership, decoupling, slices
//!   and the Caratheodory tests.
//! - [`loewner`]: RK4 integration of trajectories and coefficient systems,
//!   parametric limits, squeezing diagnostics.
//! - [`bounds`]: closed-form and numerically verified sharp bounds, the
//!   extremal fields and the shear radius.
//! - [`io`]: canonical JSON and CSV formats.

pub mod bounds;
pub mod error;
pub mod herglotz;
pub mod io;
pub mod loewner;
pub mod series;

pub use error::{Error, Result};
pub use herglotz::{
    random_member, CoeffBoundReport, FieldPiece, HerglotzField, MembershipVerdict, SampleGrid,
    SliceFunction, ToeplitzVerdict,
};
pub use loewner::{
    coeff_evolution, integrate_path, integrate_point, parametric_from_record, parametric_map,
    squeezing_equiv_check, squeezing_margin, ConvergenceReport, EvolutionRecord, RatioViolation,
    SqueezeReport,
};
pub use series::{Component, MultiIndex, PolyMap2, PolySeries};
