//! Relation-constrained fixed-point machinery.
//!
//! Points live in one of two metric spaces (real intervals or grid functions
//! on `[0, 1]`). A binary [`Relation`] restricts which pairs a contraction has
//! to control, and a [`WDistance`] replaces the metric in the contraction
//! inequality. The crate iterates self-maps, checks every hypothesis of the
//! relation-theoretic Banach principle on finite samples, and applies the
//! machinery to a nonlinear Caputo boundary-value problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod fixtures;
pub mod fractional;
pub mod relation;
pub mod space;
pub mod tail;
pub mod verifier;
pub mod wdistance;

pub use engine::{OrbitTrace, SelfMap, StopReason};
pub use error::{Error, Result};
pub use relation::{Relation, RelationReport, Verdict};
pub use space::{Grid, GridFn, MetricSpace, Point, Sampling};
pub use wdistance::WDistance;
