use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PriorError;
use crate::kinematics::rotation::{axis_angle_from_matrix, mat_mul, matrix_from_axis_angle};
use crate::kinematics::{default_skeleton, forward_kinematics_flat, MotionSequence, PoseFrame, Skeleton};

const LEFT_HIP: usize = 1;
const RIGHT_HIP: usize = 2;
const LEFT_KNEE: usize = 4;
const RIGHT_KNEE: usize = 5;
const LEFT_ANKLE: usize = 7;
const RIGHT_ANKLE: usize = 8;
const LEFT_TOE: usize = 10;
const RIGHT_TOE: usize = 11;
const LEFT_SHOULDER: usize = 16;
const RIGHT_SHOULDER: usize = 17;
/// Arms hang this far below horizontal, radians.
const ARM_DROP: f64 = 1.35;
/// Peak swing knee flexion, radians.
const SWING_KNEE: f64 = 1.1;
/// Strides shorter than this lift the swing foot proportionally less.
const FULL_LIFT_STRIDE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaitParams {
    /// Step length, meters.
    pub stride: f64,
    /// Steps per second.
    pub cadence: f64,
    /// Lateral pelvis shift toward the stance foot, meters.
    pub hip_sway: f64,
    /// Shoulder pitch amplitude, radians.
    pub arm_swing: f64,
    pub ground_height: f64,
}

impl GaitParams {
    pub fn validate(&self) -> Result<(), PriorError> {
        let ok = self.stride >= 0.0 && self.cadence > 0.0 && self.hip_sway >= 0.0;
        let finite = [self.stride, self.cadence, self.hip_sway, self.arm_swing, self.ground_height]
            .iter()
            .all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(PriorError::Config(format!("invalid gait parameters {self:?}")))
        }
    }
}

/// Sampling ranges, each `(low, high)` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaitRanges {
    pub stride: (f64, f64),
    pub cadence: (f64, f64),
    pub hip_sway: (f64, f64),
    pub arm_swing: (f64, f64),
    pub ground_height: (f64, f64),
    /// Walking direction, radians about the vertical axis.
    pub heading: (f64, f64),
}

impl Default for GaitRanges {
    fn default() -> Self {
        Self {
            stride: (0.3, 0.8),
            cadence: (1.6, 2.2),
            hip_sway: (0.0, 0.03),
            arm_swing: (0.1, 0.4),
            ground_height: (0.0, 0.0),
            heading: (-PI, PI),
        }
    }
}

/// A generated walk with its ground-truth stance mask (`[left, right]`).
#[derive(Clone, Debug)]
pub struct SyntheticWalk {
    pub motion: MotionSequence,
    pub stance: Vec<[bool; 2]>,
}

fn compose(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    axis_angle_from_matrix(&mat_mul(&matrix_from_axis_angle(a), &matrix_from_axis_angle(b)))
}

/// Wraps to `(-π, π]`.
fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Procedural walk: phase-opposed sinusoidal legs and arms with the stance
/// toe pinned to the ground, so the root advances by one stride per step.
/// The swing foot rises vertically, clearing the ground within a frame or
/// two of toe-off.
///
/// `phase` offsets the gait cycle; `heading` turns the whole walk.
pub fn synth_walk(
    params: &GaitParams,
    heading: f64,
    phase: f64,
    frames: usize,
    fps: f64,
) -> Result<SyntheticWalk, PriorError> {
    params.validate()?;
    if frames == 0 || !(fps > 0.0) {
        return Err(PriorError::Config("walk needs frames and a positive fps".into()));
    }
    let skel: Skeleton = default_skeleton();
    let leg = skel.bone_length(LEFT_KNEE) + skel.bone_length(LEFT_ANKLE);
    let amp = (params.stride / (2.0 * leg)).min(0.95).asin();
    let thigh = skel.bone_length(LEFT_KNEE);
    let shin = skel.bone_length(LEFT_ANKLE);
    let knee_amp = SWING_KNEE * (params.stride / FULL_LIFT_STRIDE).min(1.0);
    let sway = (params.hip_sway / leg).min(0.3);
    let j = skel.joint_count();

    let mut poses = Vec::with_capacity(frames);
    let mut stance = Vec::with_capacity(frames);
    for t in 0..frames {
        let phi = phase + PI * params.cadence * t as f64 / fps;
        let (s, c) = phi.sin_cos();
        let left_stance = c < 0.0;
        stance.push([left_stance, !left_stance]);
        let mut rot = vec![[0.0; 3]; j];
        rot[0] = [0.0, heading, 0.0];
        let roll = sway * c;
        for (hip, knee, ankle, theta, swing_phase) in [
            (LEFT_HIP, LEFT_KNEE, LEFT_ANKLE, amp * s, wrap(phi)),
            (RIGHT_HIP, RIGHT_KNEE, RIGHT_ANKLE, -amp * s, wrap(phi - PI)),
        ] {
            let kappa = if swing_phase.abs() < PI / 2.0 {
                knee_amp * swing_phase.cos().powf(0.25)
            } else {
                0.0
            };
            // hip flexion that keeps the ankle straight below the hip
            let lift = (shin * kappa.sin()).atan2(thigh + shin * kappa.cos());
            rot[hip] = compose([0.0, 0.0, roll], [-theta - lift, 0.0, 0.0]);
            rot[knee] = [kappa, 0.0, 0.0];
            rot[ankle] = [theta + lift - kappa, 0.0, 0.0];
        }
        let swing = params.arm_swing * s;
        rot[LEFT_SHOULDER] = compose([swing, 0.0, 0.0], [0.0, 0.0, -ARM_DROP]);
        rot[RIGHT_SHOULDER] = compose([-swing, 0.0, 0.0], [0.0, 0.0, ARM_DROP]);
        poses.push(PoseFrame { root_pos: [0.0; 3], joint_rot: rot });
    }

    // Root placement: the stance toe stays where it landed.
    let mut anchor: Option<(usize, [f64; 2])> = None;
    for (pose, st) in poses.iter_mut().zip(&stance) {
        let flat: Vec<f64> = pose.root_pos.iter().chain(pose.joint_rot.iter().flatten()).copied().collect();
        let rel = &forward_kinematics_flat(&skel, &flat, 1)?[0];
        let toe = |k: usize| rel[if k == 0 { LEFT_TOE } else { RIGHT_TOE }];
        let foot = if st[0] { 0 } else { 1 };
        let root_xz = match anchor {
            Some((prev, a)) => {
                let root = [a[0] - toe(prev).x, a[1] - toe(prev).z];
                if prev != foot {
                    anchor = Some((foot, [root[0] + toe(foot).x, root[1] + toe(foot).z]));
                }
                root
            }
            None => {
                anchor = Some((foot, [toe(foot).x, toe(foot).z]));
                [0.0, 0.0]
            }
        };
        pose.root_pos = [root_xz[0], params.ground_height - toe(foot).y, root_xz[1]];
    }
    Ok(SyntheticWalk { motion: MotionSequence::new(fps, poses)?, stance })
}

/// `n` walks with parameters, heading and phase drawn uniformly from
/// `ranges`; identical for identical seeds.
pub fn synth_walk_dataset(
    n: usize,
    seed: u64,
    ranges: &GaitRanges,
    frames: usize,
    fps: f64,
) -> Result<Vec<MotionSequence>, PriorError> {
    if n == 0 {
        return Err(PriorError::Dataset("dataset size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| if hi > lo { rng.random_range(lo..=hi) } else { lo };
    (0..n)
        .map(|_| {
            let params = GaitParams {
                stride: draw(ranges.stride),
                cadence: draw(ranges.cadence),
                hip_sway: draw(ranges.hip_sway),
                arm_swing: draw(ranges.arm_swing),
                ground_height: draw(ranges.ground_height),
            };
            let heading = draw(ranges.heading);
            let phase = draw((0.0, TAU));
            synth_walk(&params, heading, phase, frames, fps).map(|w| w.motion)
        })
        .collect()
}
