//! Programmable motion generation.
//!
//! Constraint programs written in a small DSL compile into differentiable
//! error functions over skeletal motion. The error is minimized by
//! optimizing the latent code of a pluggable motion prior with Adam.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::should_implement_trait, clippy::large_enum_variant)]

pub mod autodiff;
pub mod kinematics;
pub mod atoms;
pub mod dsl;
pub mod priors;
pub mod optimizer;
pub mod metrics;
pub mod tasks;
pub mod cli;
