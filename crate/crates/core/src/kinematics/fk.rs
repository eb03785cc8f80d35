use crate::autodiff::{AdError, Mat3, Scalar, Vec3};

use super::rotation::axis_angle_matrix;
use super::{KinematicsError, MotionSequence, PositionSequence, Skeleton};

/// Global joint positions from a flat `N × (3 + 3J)` parameter vector.
///
/// Works on plain values and on taped variables alike; the result is
/// indexed `[frame][joint]`.
pub fn forward_kinematics_flat<S: Scalar>(
    skeleton: &Skeleton,
    params: &[S],
    frames: usize,
) -> Result<Vec<Vec<Vec3<S>>>, KinematicsError> {
    let d = skeleton.pose_dim();
    if params.len() != d * frames {
        return Err(KinematicsError::JointCountMismatch {
            expected: skeleton.joint_count(),
            found: params.len().checked_div(frames).map_or(0, |d| d.saturating_sub(3) / 3),
        });
    }
    let j_count = skeleton.joint_count();
    let has_children: Vec<bool> =
        (0..j_count).map(|j| skeleton.joints.iter().any(|c| c.parent == Some(j))).collect();
    let mut out = Vec::with_capacity(frames);
    for chunk in params.chunks_exact(d) {
        let mut pos: Vec<Vec3<S>> = Vec::with_capacity(j_count);
        let mut rot: Vec<Option<Mat3<S>>> = Vec::with_capacity(j_count);
        for (j, joint) in skeleton.joints.iter().enumerate() {
            let r = [chunk[3 + 3 * j], chunk[4 + 3 * j], chunk[5 + 3 * j]];
            match joint.parent {
                None => {
                    pos.push(Vec3::new(chunk[0], chunk[1], chunk[2]));
                    rot.push(Some(axis_angle_matrix(r).map_err(ad)?));
                }
                Some(p) => {
                    let parent_rot = rot[p].as_ref().expect("parents precede children");
                    pos.push(pos[p] + parent_rot.apply_f(joint.offset));
                    if has_children[j] {
                        let local = axis_angle_matrix(r).map_err(ad)?;
                        rot.push(Some(parent_rot.mul(&local)));
                    } else {
                        rot.push(None);
                    }
                }
            }
        }
        out.push(pos);
    }
    Ok(out)
}

fn ad(e: AdError) -> KinematicsError {
    KinematicsError::Numeric(e.to_string())
}

pub fn forward_kinematics(skeleton: &Skeleton, motion: &MotionSequence) -> Result<PositionSequence, KinematicsError> {
    if motion.joint_count() != skeleton.joint_count() {
        return Err(KinematicsError::JointCountMismatch {
            expected: skeleton.joint_count(),
            found: motion.joint_count(),
        });
    }
    let flat = motion.flatten();
    let pos = forward_kinematics_flat(skeleton, &flat, motion.frame_count())?;
    Ok(to_positions(&pos))
}

pub fn to_positions(pos: &[Vec<Vec3<f64>>]) -> PositionSequence {
    PositionSequence { pos: pos.iter().map(|f| f.iter().map(|p| [p.x, p.y, p.z]).collect()).collect() }
}

/// Forward k-th differences scaled by `fps^k` along one trajectory.
pub fn difference_trajectory<S: Scalar>(
    traj: &[Vec3<S>],
    k: usize,
    fps: f64,
) -> Result<Vec<Vec3<S>>, KinematicsError> {
    if k == 0 || k >= traj.len() {
        return Err(KinematicsError::DifferenceOrder { order: k, frames: traj.len() });
    }
    let coef = binomial_signs(k);
    let scale = fps.powi(k as i32);
    Ok((0..traj.len() - k)
        .map(|t| {
            let mut acc = traj[t].scale_f(coef[0] * scale);
            for (i, c) in coef.iter().enumerate().skip(1) {
                acc = acc + traj[t + i].scale_f(c * scale);
            }
            acc
        })
        .collect())
}

/// Coefficients of the forward difference: `Δ^k x_t = Σ_i c_i x_{t+i}`.
fn binomial_signs(k: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] -= v;
            next[i + 1] += v;
        }
        c = next;
    }
    c
}

/// k-th forward difference of every joint, `(N − k) × J`, in m/s^k.
pub fn finite_difference(pos: &PositionSequence, k: usize, fps: f64) -> Result<Vec<Vec<[f64; 3]>>, KinematicsError> {
    let n = pos.frame_count();
    if k == 0 || k >= n {
        return Err(KinematicsError::DifferenceOrder { order: k, frames: n });
    }
    let j_count = pos.joint_count();
    let mut out = vec![vec![[0.0; 3]; j_count]; n - k];
    for j in 0..j_count {
        let traj: Vec<Vec3<f64>> = pos.pos.iter().map(|f| f[j].into()).collect();
        for (t, v) in difference_trajectory(&traj, k, fps)?.into_iter().enumerate() {
            out[t][j] = [v.x, v.y, v.z];
        }
    }
    Ok(out)
}

/// Per-frame bone lengths in skeleton order, `N × (J − 1)`.
pub fn bone_lengths(skeleton: &Skeleton, pos: &PositionSequence) -> Vec<Vec<f64>> {
    pos.pos
        .iter()
        .map(|f| {
            skeleton
                .joints
                .iter()
                .enumerate()
                .filter_map(|(j, jt)| jt.parent.map(|p| dist(f[j], f[p])))
                .collect()
        })
        .collect()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
