//! Motion JSON, BVH and CSV formats.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::rotation::{euler_zyx_from_matrix, matrix_from_axis_angle};
use super::skeleton::DEFAULT_SKELETON_ID;
use super::{default_skeleton, KinematicsError, MotionSequence, PoseFrame, PositionSequence, Skeleton};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SkeletonRef {
    Named(String),
    Inline(Box<Skeleton>),
}

#[derive(Serialize, Deserialize)]
struct FrameJson {
    root: [f64; 3],
    rot: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct MotionFile {
    fps: f64,
    skeleton: SkeletonRef,
    frames: Vec<FrameJson>,
}

/// Parses a motion file; axis-angles are canonicalized on load.
pub fn read_motion_json(text: &str) -> Result<(Skeleton, MotionSequence), KinematicsError> {
    let file: MotionFile = serde_json::from_str(text).map_err(|e| KinematicsError::Format(e.to_string()))?;
    let skeleton = match file.skeleton {
        SkeletonRef::Named(name) if name == DEFAULT_SKELETON_ID => default_skeleton(),
        SkeletonRef::Named(name) => return Err(KinematicsError::Format(format!("unknown skeleton '{name}'"))),
        SkeletonRef::Inline(s) => {
            s.validate()?;
            *s
        }
    };
    let frames = file.frames.into_iter().map(|f| PoseFrame { root_pos: f.root, joint_rot: f.rot }).collect();
    let motion = MotionSequence::new(file.fps, frames)?.canonicalized();
    if motion.joint_count() != skeleton.joint_count() {
        return Err(KinematicsError::JointCountMismatch {
            expected: skeleton.joint_count(),
            found: motion.joint_count(),
        });
    }
    Ok((skeleton, motion))
}

pub fn write_motion_json(skeleton: &Skeleton, motion: &MotionSequence) -> String {
    let skeleton = if *skeleton == default_skeleton() {
        SkeletonRef::Named(DEFAULT_SKELETON_ID.to_string())
    } else {
        SkeletonRef::Inline(Box::new(skeleton.clone()))
    };
    let file = MotionFile {
        fps: motion.fps,
        skeleton,
        frames: motion.frames.iter().map(|f| FrameJson { root: f.root_pos, rot: f.joint_rot.clone() }).collect(),
    };
    serde_json::to_string_pretty(&file).expect("motion serializes")
}

/// BVH text: hierarchy from the skeleton offsets, motion channels as Z-Y-X
/// Euler angles in degrees.
pub fn write_bvh(skeleton: &Skeleton, motion: &MotionSequence) -> String {
    let mut out = String::from("HIERARCHY\n");
    let mut order = Vec::new();
    write_joint(skeleton, 0, 0, &mut out, &mut order);
    let _ = writeln!(out, "MOTION");
    let _ = writeln!(out, "Frames: {}", motion.frame_count());
    let _ = writeln!(out, "Frame Time: {:.6}", 1.0 / motion.fps);
    for f in &motion.frames {
        let mut row: Vec<String> = f.root_pos.iter().map(|v| format!("{v:.6}")).collect();
        for &j in &order {
            let e = euler_zyx_from_matrix(&matrix_from_axis_angle(f.joint_rot[j]));
            row.extend(e.iter().map(|v| format!("{:.6}", v.to_degrees())));
        }
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

fn write_joint(s: &Skeleton, j: usize, depth: usize, out: &mut String, order: &mut Vec<usize>) {
    let pad = "  ".repeat(depth);
    let joint = &s.joints[j];
    order.push(j);
    if joint.parent.is_none() {
        let _ = writeln!(out, "{pad}ROOT {}", joint.name);
    } else {
        let _ = writeln!(out, "{pad}JOINT {}", joint.name);
    }
    let _ = writeln!(out, "{pad}{{");
    let o = joint.offset;
    let _ = writeln!(out, "{pad}  OFFSET {:.6} {:.6} {:.6}", o[0], o[1], o[2]);
    if joint.parent.is_none() {
        let _ = writeln!(out, "{pad}  CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation");
    } else {
        let _ = writeln!(out, "{pad}  CHANNELS 3 Zrotation Yrotation Xrotation");
    }
    let children: Vec<usize> = s.children(j).collect();
    if children.is_empty() {
        let _ = writeln!(out, "{pad}  End Site");
        let _ = writeln!(out, "{pad}  {{");
        let _ = writeln!(out, "{pad}    OFFSET 0.000000 0.000000 0.000000");
        let _ = writeln!(out, "{pad}  }}");
    }
    for c in children {
        write_joint(s, c, depth + 1, out, order);
    }
    let _ = writeln!(out, "{pad}}}");
}

/// One row per frame, columns `j{i}_x, j{i}_y, j{i}_z`.
pub fn write_positions_csv(pos: &PositionSequence) -> String {
    let j = pos.joint_count();
    let mut out = (0..j).map(|i| format!("j{i}_x,j{i}_y,j{i}_z")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for f in &pos.pos {
        let row: Vec<String> = f.iter().flat_map(|p| p.iter().map(|v| format!("{v}"))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
