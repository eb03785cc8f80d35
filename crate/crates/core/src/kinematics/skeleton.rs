use serde::{Deserialize, Serialize};

use super::KinematicsError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    /// Rest offset from the parent joint, meters.
    pub offset: [f64; 3],
}

/// Joint hierarchy with fixed bone offsets.
///
/// Bone `b` connects joint `b + 1` to its parent; `mass_fraction[b]` is that
/// bone's share of a unit body mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub id: String,
    pub joints: Vec<Joint>,
    pub foot_joints: Vec<usize>,
    pub head_joint: usize,
    pub neck_joint: usize,
    pub left_hand_joint: usize,
    pub chest_joint: usize,
    pub mass_fraction: Vec<f64>,
}

pub const DEFAULT_SKELETON_ID: &str = "default22";

/// (name, parent, offset) for the 22-joint humanoid. Y is up, the character
/// faces +z and its left side is +x.
const DEFAULT_JOINTS: [(&str, Option<usize>, [f64; 3]); 22] = [
    ("pelvis", None, [0.0, 0.0, 0.0]),
    ("left_hip", Some(0), [0.06, -0.09, 0.0]),
    ("right_hip", Some(0), [-0.06, -0.09, 0.0]),
    ("spine1", Some(0), [0.0, 0.11, 0.0]),
    ("left_knee", Some(1), [0.0, -0.38, 0.0]),
    ("right_knee", Some(2), [0.0, -0.38, 0.0]),
    ("spine2", Some(3), [0.0, 0.13, 0.0]),
    ("left_ankle", Some(4), [0.0, -0.40, 0.0]),
    ("right_ankle", Some(5), [0.0, -0.40, 0.0]),
    ("spine3", Some(6), [0.0, 0.06, 0.0]),
    ("left_foot", Some(7), [0.0, -0.05, 0.12]),
    ("right_foot", Some(8), [0.0, -0.05, 0.12]),
    ("neck", Some(9), [0.0, 0.21, 0.0]),
    ("left_collar", Some(9), [0.07, 0.12, 0.0]),
    ("right_collar", Some(9), [-0.07, 0.12, 0.0]),
    ("head", Some(12), [0.0, 0.08, 0.0]),
    ("left_shoulder", Some(13), [0.10, 0.0, 0.0]),
    ("right_shoulder", Some(14), [-0.10, 0.0, 0.0]),
    ("left_elbow", Some(16), [0.26, 0.0, 0.0]),
    ("right_elbow", Some(17), [-0.26, 0.0, 0.0]),
    ("left_hand", Some(18), [0.25, 0.0, 0.0]),
    ("right_hand", Some(19), [-0.25, 0.0, 0.0]),
];

/// Extra names accepted when resolving joints.
const ALIASES: [(&str, &str); 5] = [
    ("root", "pelvis"),
    ("chest", "spine3"),
    ("left_wrist", "left_hand"),
    ("right_wrist", "right_hand"),
    ("left_toe", "left_foot"),
];

impl Skeleton {
    /// Builds and validates a skeleton.
    pub fn new(
        id: impl Into<String>,
        joints: Vec<Joint>,
        foot_joints: Vec<usize>,
        [head_joint, neck_joint, left_hand_joint, chest_joint]: [usize; 4],
        mass_fraction: Option<Vec<f64>>,
    ) -> Result<Self, KinematicsError> {
        let mass_fraction = match mass_fraction {
            Some(m) => m,
            None => length_proportional_masses(&joints),
        };
        let s = Self {
            id: id.into(),
            joints,
            foot_joints,
            head_joint,
            neck_joint,
            left_hand_joint,
            chest_joint,
            mass_fraction,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |msg: String| Err(KinematicsError::InvalidSkeleton(msg));
        if self.joints.is_empty() {
            return bad("no joints".into());
        }
        for (i, j) in self.joints.iter().enumerate() {
            match j.parent {
                None if i != 0 => return bad(format!("joint {i} ({}) is a second root", j.name)),
                None => {
                    if j.offset != [0.0; 3] {
                        return bad("root offset must be zero".into());
                    }
                }
                Some(p) if p >= i => {
                    return bad(format!("joint {i} ({}) has parent {p} that does not precede it", j.name))
                }
                Some(_) => {
                    if norm(j.offset) <= 0.0 {
                        return bad(format!("bone to joint {i} ({}) has zero length", j.name));
                    }
                }
            }
            if j.offset.iter().any(|v| !v.is_finite()) {
                return bad(format!("joint {i} has a non-finite offset"));
            }
        }
        let j = self.joints.len();
        let check = |idx: usize, what: &str| {
            if idx >= j {
                Err(KinematicsError::InvalidSkeleton(format!("{what} index {idx} out of range")))
            } else {
                Ok(())
            }
        };
        for &f in &self.foot_joints {
            check(f, "foot joint")?;
        }
        check(self.head_joint, "head joint")?;
        check(self.neck_joint, "neck joint")?;
        check(self.left_hand_joint, "left hand joint")?;
        check(self.chest_joint, "chest joint")?;
        if self.mass_fraction.len() != j - 1 {
            return bad(format!("expected {} bone masses, got {}", j - 1, self.mass_fraction.len()));
        }
        if self.mass_fraction.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return bad("bone masses must be finite and nonnegative".into());
        }
        let total: f64 = self.mass_fraction.iter().sum();
        if j > 1 && (total - 1.0).abs() > 1e-9 {
            return bad(format!("bone masses sum to {total}, expected 1"));
        }
        Ok(())
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    /// Pose dimensionality: root translation plus one axis-angle per joint.
    pub fn pose_dim(&self) -> usize {
        3 + 3 * self.joints.len()
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        self.joints[j].parent
    }

    pub fn children(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.joints.iter().enumerate().filter(move |(_, jt)| jt.parent == Some(j)).map(|(i, _)| i)
    }

    /// Template bone length for the bone ending at joint `j` (0 for the root).
    pub fn bone_length(&self, j: usize) -> f64 {
        norm(self.joints[j].offset)
    }

    /// Resolves a joint name (or alias) to its index.
    pub fn joint_index(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.joints.iter().position(|j| j.name == name) {
            return Some(i);
        }
        if self.id == DEFAULT_SKELETON_ID {
            let target = ALIASES.iter().find(|(a, _)| *a == name)?.1;
            return self.joints.iter().position(|j| j.name == target);
        }
        None
    }

    /// Rest-pose global position of every joint (all rotations zero, root at
    /// the origin).
    pub fn rest_positions(&self) -> Vec<[f64; 3]> {
        let mut out: Vec<[f64; 3]> = Vec::with_capacity(self.joints.len());
        for j in &self.joints {
            let p = match j.parent {
                None => [0.0; 3],
                Some(p) => {
                    let q = out[p];
                    [q[0] + j.offset[0], q[1] + j.offset[1], q[2] + j.offset[2]]
                }
            };
            out.push(p);
        }
        out
    }
}

/// The 22-joint humanoid used throughout the crate.
///
/// Indices follow the common 22-joint body layout: 12 is the neck base, 15
/// the head and 20 the left hand. The neck bone (12 → 15) is 0.08 m.
pub fn default_skeleton() -> Skeleton {
    let joints = DEFAULT_JOINTS
        .iter()
        .map(|(name, parent, offset)| Joint { name: (*name).to_string(), parent: *parent, offset: *offset })
        .collect();
    Skeleton::new(DEFAULT_SKELETON_ID, joints, vec![10, 11], [15, 12, 20, 9], None)
        .expect("default skeleton is valid")
}

fn length_proportional_masses(joints: &[Joint]) -> Vec<f64> {
    let lengths: Vec<f64> = joints.iter().skip(1).map(|j| norm(j.offset)).collect();
    let total: f64 = lengths.iter().sum();
    if total <= 0.0 {
        return lengths;
    }
    lengths.iter().map(|l| l / total).collect()
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let s = default_skeleton();
        assert_eq!(s.joint_count(), 22);
        assert_eq!(s.joints[0].parent, None);
        assert_eq!(s.joint_index("left_hand"), Some(20));
        assert_eq!(s.joint_index("left_wrist"), Some(20));
        assert_eq!(s.joint_index("head"), Some(15));
        assert_eq!(s.joint_index("neck"), Some(12));
        assert_eq!(s.joints[15].parent, Some(12));
        assert!((s.bone_length(15) - 0.08).abs() < 1e-15);
        assert_eq!(s.pose_dim(), 69);
    }

    #[test]
    fn masses_sum_to_one() {
        let s = default_skeleton();
        let total: f64 = s.mass_fraction.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standing_height() {
        // toes touch y = 0 when the pelvis is 0.92 m up
        let rest = default_skeleton().rest_positions();
        assert!((rest[10][1] + 0.92).abs() < 1e-12);
        assert!((rest[15][1] - 0.59).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_hierarchy() {
        let joints = vec![
            Joint { name: "a".into(), parent: None, offset: [0.0; 3] },
            Joint { name: "b".into(), parent: Some(2), offset: [0.0, 1.0, 0.0] },
            Joint { name: "c".into(), parent: Some(0), offset: [0.0, 1.0, 0.0] },
        ];
        assert!(Skeleton::new("x", joints, vec![], [0, 0, 0, 0], None).is_err());
    }

    #[test]
    fn rejects_zero_bone_and_bad_masses() {
        let mk = |off: [f64; 3], m: Option<Vec<f64>>| {
            let joints = vec![
                Joint { name: "a".into(), parent: None, offset: [0.0; 3] },
                Joint { name: "b".into(), parent: Some(0), offset: off },
            ];
            Skeleton::new("x", joints, vec![], [0, 0, 0, 0], m)
        };
        assert!(mk([0.0; 3], None).is_err());
        assert!(mk([0.0, 1.0, 0.0], Some(vec![0.5])).is_err());
        assert!(mk([0.0, 1.0, 0.0], None).is_ok());
    }
}
