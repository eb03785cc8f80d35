use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_len, standing_height, MotionPrior, PriorError};
use crate::autodiff::{Scalar, Var};
use crate::kinematics::Skeleton;

/// Per-channel amplitude of one latent unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DctScales {
    /// Root x and z, meters.
    pub root_xz: f64,
    /// Root height, meters.
    pub root_y: f64,
    /// Axis-angle components, radians.
    pub rotation: f64,
}

impl Default for DctScales {
    fn default() -> Self {
        Self { root_xz: 0.5, root_y: 0.1, rotation: 0.15 }
    }
}

/// Low-frequency cosine expansion of every pose channel.
///
/// Channel `c` at frame `t` is `s_c · Σ_k z[c·K + k] · cos(π (t + ½) k / N)`,
/// so `K = 1` yields constant channels and `z = 0` the zero motion.
#[derive(Clone, Debug)]
pub struct DctPrior {
    skeleton: Skeleton,
    frames: usize,
    k: usize,
    fps: f64,
    scales: DctScales,
    /// `basis[t * K + k]`.
    basis: Vec<f64>,
}

impl DctPrior {
    pub fn new(skeleton: Skeleton, frames: usize, k: usize, fps: f64) -> Result<Self, PriorError> {
        Self::with_scales(skeleton, frames, k, fps, DctScales::default())
    }

    pub fn with_scales(
        skeleton: Skeleton,
        frames: usize,
        k: usize,
        fps: f64,
        scales: DctScales,
    ) -> Result<Self, PriorError> {
        if frames < 2 {
            return Err(PriorError::Config(format!("DCT prior needs at least 2 frames, got {frames}")));
        }
        if k == 0 || k > frames {
            return Err(PriorError::Config(format!("coefficient count K={k} must be in 1..={frames}")));
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(PriorError::Config(format!("fps must be positive, got {fps}")));
        }
        let n = frames as f64;
        let basis = (0..frames)
            .flat_map(|t| (0..k).map(move |j| (PI * (t as f64 + 0.5) * j as f64 / n).cos()))
            .collect();
        Ok(Self { skeleton, frames, k, fps, scales, basis })
    }

    pub fn coefficients(&self) -> usize {
        self.k
    }

    fn channel_scale(&self, c: usize) -> f64 {
        match c {
            0 | 2 => self.scales.root_xz,
            1 => self.scales.root_y,
            _ => self.scales.rotation,
        }
    }

    fn decode_generic<S: Scalar>(&self, z: &[S], ctx: S) -> Vec<S> {
        let d = self.skeleton.pose_dim();
        let k = self.k;
        let mut out = Vec::with_capacity(d * self.frames);
        let mut terms = Vec::with_capacity(k);
        for t in 0..self.frames {
            let row = &self.basis[t * k..(t + 1) * k];
            for c in 0..d {
                let s = self.channel_scale(c);
                terms.clear();
                terms.extend(z[c * k..(c + 1) * k].iter().zip(row).map(|(&zi, &b)| (zi, s * b)));
                out.push(S::linear_combination(ctx, &terms, 0.0));
            }
        }
        out
    }
}

impl MotionPrior for DctPrior {
    fn id(&self) -> String {
        format!("dct:K={}", self.k)
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
        self.skeleton.pose_dim() * self.k
    }

    /// Standard normal coefficients damped by `1 / (1 + k)`, with the root
    /// height's constant term lifted so the body starts upright.
    fn sample_latent(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z: Vec<f64> = (0..self.latent_dim())
            .map(|i| {
                let n: f64 = StandardNormal.sample(&mut rng);
                n / (1.0 + (i % self.k) as f64)
            })
            .collect();
        z[self.k] += standing_height(&self.skeleton) / self.scales.root_y;
        z
    }

    fn decode_values(&self, z: &[f64]) -> Result<Vec<f64>, PriorError> {
        check_len(self.latent_dim(), z)?;
        Ok(self.decode_generic(z, 0.0))
    }

    fn decode_vars<'t>(&self, z: &[Var<'t>]) -> Result<Vec<Var<'t>>, PriorError> {
        check_len(self.latent_dim(), z)?;
        let ctx = z.first().copied().ok_or(PriorError::LatentLength { expected: self.latent_dim(), found: 0 })?;
        Ok(self.decode_generic(z, ctx))
    }
}
