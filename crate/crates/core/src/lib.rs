//! Random hopping dynamics of the random energy model.
//!
//! The process is simulated as the simple random walk on the hypercube
//! time-changed by its clock process. Around that core sit the scale
//! resolution, the lazily generated landscape, two-time correlation
//! estimators, the closed-form limit objects, and exact small-instance
//! oracles used for cross-validation.

// NaN-rejecting guards are written as `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod landscape;
pub mod limits;
pub mod oracles;
pub mod scales;
pub mod seeding;
pub mod special;

pub use error::{Error, Result};
pub use landscape::{Landscape, LandscapeMode, PoissonCascade, Vertex};
pub use scales::{solve_scales, ModelParams, ScaleKind, Scales};
