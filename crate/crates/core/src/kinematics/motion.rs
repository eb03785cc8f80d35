use serde::{Deserialize, Serialize};

use super::rotation::canonicalize;
use super::KinematicsError;

/// Frame rate used when none is given.
pub const DEFAULT_FPS: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseFrame {
    /// Root translation, meters.
    pub root_pos: [f64; 3],
    /// Per-joint local axis-angle rotation, radians.
    pub joint_rot: Vec<[f64; 3]>,
}

impl PoseFrame {
    pub fn rest(joints: usize) -> Self {
        Self { root_pos: [0.0; 3], joint_rot: vec![[0.0; 3]; joints] }
    }
}

/// N frames of root translation plus per-joint rotations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSequence {
    pub fps: f64,
    pub frames: Vec<PoseFrame>,
}

impl MotionSequence {
    pub fn new(fps: f64, frames: Vec<PoseFrame>) -> Result<Self, KinematicsError> {
        let m = Self { fps, frames };
        m.validate()?;
        Ok(m)
    }

    /// All-zero motion: rest pose with the root at the origin.
    pub fn rest(frames: usize, joints: usize, fps: f64) -> Self {
        Self { fps, frames: vec![PoseFrame::rest(joints); frames] }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if self.frames.len() < 2 {
            return Err(KinematicsError::InvalidMotion(format!(
                "need at least 2 frames, got {}",
                self.frames.len()
            )));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(KinematicsError::InvalidMotion(format!("fps must be positive, got {}", self.fps)));
        }
        let j = self.frames[0].joint_rot.len();
        for (t, f) in self.frames.iter().enumerate() {
            if f.joint_rot.len() != j {
                return Err(KinematicsError::InvalidMotion(format!(
                    "frame {t} has {} joints, frame 0 has {j}",
                    f.joint_rot.len()
                )));
            }
            let finite = f.root_pos.iter().chain(f.joint_rot.iter().flatten()).all(|v| v.is_finite());
            if !finite {
                return Err(KinematicsError::InvalidMotion(format!("frame {t} has non-finite values")));
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.joint_rot.len())
    }

    /// Wraps every axis-angle into [0, 2π).
    pub fn canonicalized(mut self) -> Self {
        for f in &mut self.frames {
            for r in &mut f.joint_rot {
                *r = canonicalize(*r);
            }
        }
        self
    }

    /// Row-major `N × (3 + 3J)` parameter vector.
    pub fn flatten(&self) -> Vec<f64> {
        let d = 3 + 3 * self.joint_count();
        let mut out = Vec::with_capacity(d * self.frames.len());
        for f in &self.frames {
            out.extend_from_slice(&f.root_pos);
            for r in &f.joint_rot {
                out.extend_from_slice(r);
            }
        }
        out
    }

    pub fn from_flat(flat: &[f64], frames: usize, joints: usize, fps: f64) -> Result<Self, KinematicsError> {
        let d = 3 + 3 * joints;
        if flat.len() != d * frames {
            return Err(KinematicsError::InvalidMotion(format!(
                "flat parameter vector has {} entries, expected {}",
                flat.len(),
                d * frames
            )));
        }
        let frames = flat
            .chunks_exact(d)
            .map(|c| PoseFrame {
                root_pos: [c[0], c[1], c[2]],
                joint_rot: c[3..].chunks_exact(3).map(|r| [r[0], r[1], r[2]]).collect(),
            })
            .collect();
        Self::new(fps, frames)
    }
}

/// Global joint positions, `N × J`, meters, y up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionSequence {
    pub pos: Vec<Vec<[f64; 3]>>,
}

impl PositionSequence {
    pub fn frame_count(&self) -> usize {
        self.pos.len()
    }

    pub fn joint_count(&self) -> usize {
        self.pos.first().map_or(0, Vec::len)
    }

    /// Trajectory of one joint.
    pub fn joint(&self, j: usize) -> Vec<[f64; 3]> {
        self.pos.iter().map(|f| f[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_round_trip() {
        let mut m = MotionSequence::rest(3, 2, 20.0);
        m.frames[1].root_pos = [1.0, 2.0, 3.0];
        m.frames[2].joint_rot[1] = [0.1, 0.2, 0.3];
        let flat = m.flatten();
        assert_eq!(flat.len(), 3 * 9);
        assert_eq!(MotionSequence::from_flat(&flat, 3, 2, 20.0).unwrap(), m);
    }

    #[test]
    fn rejects_short_or_ragged() {
        assert!(MotionSequence::new(20.0, vec![PoseFrame::rest(2)]).is_err());
        assert!(MotionSequence::new(20.0, vec![PoseFrame::rest(2), PoseFrame::rest(3)]).is_err());
        assert!(MotionSequence::new(0.0, vec![PoseFrame::rest(2); 2]).is_err());
        let mut m = MotionSequence::rest(2, 1, 20.0);
        m.frames[0].root_pos[0] = f64::NAN;
        assert!(m.validate().is_err());
    }
}
