//! Bounds on the Hessian integrability exponent of Pucci supersolutions,
//! real Lambert W branches, and a discrete lab for convex envelopes and
//! the opening field `Θ`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod counterexample;
pub mod decay;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod lp;
pub mod lambert;
pub mod optimize;
pub mod report;
pub mod theta;

pub use error::{Error, Result};
