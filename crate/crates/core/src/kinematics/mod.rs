//! Skeleton, motion representation, forward kinematics and the rigid
//! horizontal-plane transforms used by constraint relaxation.
//!
//! A motion is stored as root translation plus one local axis-angle per
//! joint, so bone lengths are fixed by construction: every position
//! sequence produced by [`forward_kinematics`] reproduces the template
//! offsets exactly.

mod fk;
pub mod io;
mod motion;
pub mod rotation;
mod skeleton;
mod transform;

pub use fk::{
    bone_lengths, difference_trajectory, finite_difference, forward_kinematics, forward_kinematics_flat,
    to_positions,
};
pub use motion::{MotionSequence, PoseFrame, PositionSequence, DEFAULT_FPS};
pub use skeleton::{default_skeleton, Joint, Skeleton, DEFAULT_SKELETON_ID};
pub use transform::{apply_yaw_translate, yaw_translate, YawTranslate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("invalid skeleton: {0}")]
    InvalidSkeleton(String),
    #[error("invalid motion: {0}")]
    InvalidMotion(String),
    #[error("joint count mismatch: skeleton has {expected}, motion has {found}")]
    JointCountMismatch { expected: usize, found: usize },
    #[error("difference order {order} needs more than {frames} frames")]
    DifferenceOrder { order: usize, frames: usize },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("malformed motion file: {0}")]
    Format(String),
}
