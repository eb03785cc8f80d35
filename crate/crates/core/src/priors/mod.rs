//! Motion priors: differentiable decoders from a latent vector to a motion.
//!
//! Every shipped prior is affine in its latent code, so decoding a taped
//! latent records one linear node per output channel.

mod dct;
mod gait;
mod identity;
mod pca;

use std::str::FromStr;

pub use dct::DctPrior;
pub use gait::{synth_walk, synth_walk_dataset, GaitParams, GaitRanges, SyntheticWalk};
pub use identity::IdentityPrior;
pub use pca::PcaPrior;

use crate::autodiff::{Scalar, Var};
use crate::kinematics::{KinematicsError, MotionSequence, Skeleton};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PriorError {
    #[error("invalid prior configuration: {0}")]
    Config(String),
    #[error("latent has {found} entries, prior expects {expected}")]
    LatentLength { expected: usize, found: usize },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("prior file: {0}")]
    Format(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Decoder contract `z → motion`.
///
/// `decode` must be deterministic, and the value and taped paths must agree.
pub trait MotionPrior: Send + Sync {
    /// Short identifier such as `dct:K=8`, recorded in run manifests.
    fn id(&self) -> String;
    fn skeleton(&self) -> &Skeleton;
    fn frames(&self) -> usize;
    fn fps(&self) -> f64;
    fn latent_dim(&self) -> usize;
    /// Deterministic starting latent for a seed.
    fn sample_latent(&self, seed: u64) -> Vec<f64>;
    /// Flat `N × (3 + 3J)` motion parameters.
    fn decode_values(&self, z: &[f64]) -> Result<Vec<f64>, PriorError>;
    fn decode_vars<'t>(&self, z: &[Var<'t>]) -> Result<Vec<Var<'t>>, PriorError>;

    fn decode(&self, z: &[f64]) -> Result<MotionSequence, PriorError> {
        let flat = self.decode_values(z)?;
        Ok(MotionSequence::from_flat(&flat, self.frames(), self.skeleton().joint_count(), self.fps())?)
    }
}

/// Scalars a [`MotionPrior`] can decode.
pub trait Decode: Scalar {
    fn decode_with(prior: &dyn MotionPrior, z: &[Self]) -> Result<Vec<Self>, PriorError>;
}

impl Decode for f64 {
    fn decode_with(prior: &dyn MotionPrior, z: &[f64]) -> Result<Vec<f64>, PriorError> {
        prior.decode_values(z)
    }
}

impl<'t> Decode for Var<'t> {
    fn decode_with(prior: &dyn MotionPrior, z: &[Var<'t>]) -> Result<Vec<Var<'t>>, PriorError> {
        prior.decode_vars(z)
    }
}

pub(crate) fn check_len(expected: usize, z: &[impl Sized]) -> Result<(), PriorError> {
    if z.len() == expected {
        Ok(())
    } else {
        Err(PriorError::LatentLength { expected, found: z.len() })
    }
}

/// Prior choice as written on the command line: `identity`, `dct:K=8` or
/// `pca:path/to/model.json`.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorSpec {
    Identity,
    Dct { k: usize },
    Pca { path: std::path::PathBuf },
}

impl FromStr for PriorSpec {
    type Err = PriorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PriorError::Config(format!("unknown prior '{s}', expected identity, dct:K=<n> or pca:<path>"));
        if s == "identity" {
            return Ok(PriorSpec::Identity);
        }
        if s == "dct" {
            return Ok(PriorSpec::Dct { k: 8 });
        }
        if let Some(rest) = s.strip_prefix("dct:") {
            let k = rest.strip_prefix("K=").or_else(|| rest.strip_prefix("k=")).unwrap_or(rest);
            return k.parse().map(|k| PriorSpec::Dct { k }).map_err(|_| bad());
        }
        if let Some(path) = s.strip_prefix("pca:") {
            if !path.is_empty() {
                return Ok(PriorSpec::Pca { path: path.into() });
            }
        }
        Err(bad())
    }
}

impl PriorSpec {
    /// Instantiates the prior. PCA models carry their own frame count and
    /// ignore `frames` and `fps`.
    pub fn build(&self, skeleton: &Skeleton, frames: usize, fps: f64) -> Result<Box<dyn MotionPrior>, PriorError> {
        Ok(match self {
            PriorSpec::Identity => Box::new(IdentityPrior::new(skeleton.clone(), frames, fps)?),
            PriorSpec::Dct { k } => Box::new(DctPrior::new(skeleton.clone(), frames, *k, fps)?),
            PriorSpec::Pca { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| PriorError::Format(format!("{}: {e}", path.display())))?;
                Box::new(PcaPrior::from_json(&text)?)
            }
        })
    }
}

/// Standing root height of a skeleton: pelvis above the lowest rest joint.
pub(crate) fn standing_height(skeleton: &Skeleton) -> f64 {
    -skeleton.rest_positions().iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)
}
