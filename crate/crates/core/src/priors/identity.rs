use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{check_len, standing_height, MotionPrior, PriorError};
use crate::autodiff::Var;
use crate::kinematics::Skeleton;

/// The latent is the flat motion itself. Optimizing through it is plain IK.
#[derive(Clone, Debug)]
pub struct IdentityPrior {
    skeleton: Skeleton,
    frames: usize,
    fps: f64,
    /// Standard deviation of the joint-angle jitter in sampled latents.
    pub jitter: f64,
}

impl IdentityPrior {
    pub fn new(skeleton: Skeleton, frames: usize, fps: f64) -> Result<Self, PriorError> {
        if frames < 2 {
            return Err(PriorError::Config(format!("identity prior needs at least 2 frames, got {frames}")));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(PriorError::Config(format!("fps must be positive, got {fps}")));
        }
        Ok(Self { skeleton, frames, fps, jitter: 0.05 })
    }
}

impl MotionPrior for IdentityPrior {
    fn id(&self) -> String {
        "identity".into()
    }

    fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    fn frames(&self) -> usize {
        self.frames
    }

    fn fps(&self) -> f64 {
        self.fps
    }

    fn latent_dim(&self) -> usize {
        self.skeleton.pose_dim() * self.frames
    }

    /// A standing rest pose with small joint-angle noise.
    fn sample_latent(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, self.jitter.max(0.0)).expect("finite deviation");
        let height = standing_height(&self.skeleton);
        let d = self.skeleton.pose_dim();
        let mut z = vec![0.0; self.latent_dim()];
        for frame in z.chunks_exact_mut(d) {
            frame[1] = height;
            for r in &mut frame[3..] {
                *r = noise.sample(&mut rng);
            }
        }
        z
    }

    fn decode_values(&self, z: &[f64]) -> Result<Vec<f64>, PriorError> {
        check_len(self.latent_dim(), z)?;
        Ok(z.to_vec())
    }

    fn decode_vars<'t>(&self, z: &[Var<'t>]) -> Result<Vec<Var<'t>>, PriorError> {
        check_len(self.latent_dim(), z)?;
        Ok(z.to_vec())
    }
}
