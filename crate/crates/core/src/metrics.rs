//! Motion-quality metrics and per-task constraint error.

use serde::{Deserialize, Serialize};

use crate::dsl::{ErrorProgram, EvalError, ParamValue};
use crate::kinematics::{forward_kinematics, MotionSequence, PositionSequence, Skeleton};

/// Ground contact height for foot skating, meters.
pub const FOOT_HEIGHT_THRESHOLD: f64 = 0.05;
/// Horizontal foot speed above which a grounded foot skates, m/s.
pub const FOOT_SPEED_THRESHOLD: f64 = 0.50;
/// A sample fails when its constraint error exceeds this, meters.
pub const SUCCESS_THRESHOLD: f64 = 0.05;
pub const BONE_TOLERANCE: f64 = 0.025;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no foot joints given")]
    NoFeet,
    #[error("joint index {0} out of range")]
    Joint(usize),
    #[error("thresholds must be positive")]
    Threshold,
    #[error("{what} needs at least {needed} frames, got {frames}")]
    TooShort { what: &'static str, needed: usize, frames: usize },
    #[error("no samples")]
    Empty,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Fraction of frames in which some foot is below `h_thresh` while moving
/// horizontally faster than `v_thresh`.
///
/// Speed at frame `t` is the forward difference to `t + 1`; the last frame
/// reuses the final difference.
pub fn foot_skate_ratio(
    pos: &PositionSequence,
    foot_joints: &[usize],
    fps: f64,
    h_thresh: f64,
    v_thresh: f64,
) -> Result<f64, MetricsError> {
    if foot_joints.is_empty() {
        return Err(MetricsError::NoFeet);
    }
    if !(h_thresh > 0.0 && v_thresh > 0.0 && fps > 0.0) {
        return Err(MetricsError::Threshold);
    }
    let n = pos.frame_count();
    if n < 2 {
        return Err(MetricsError::TooShort { what: "foot skating", needed: 2, frames: n });
    }
    if let Some(&j) = foot_joints.iter().find(|&&j| j >= pos.joint_count()) {
        return Err(MetricsError::Joint(j));
    }
    let skating = (0..n)
        .filter(|&t| {
            let a = t.min(n - 2);
            foot_joints.iter().any(|&j| {
                let (p, q) = (pos.pos[a][j], pos.pos[a + 1][j]);
                let speed = (q[0] - p[0]).hypot(q[2] - p[2]) * fps;
                pos.pos[t][j][1] < h_thresh && speed > v_thresh
            })
        })
        .count();
    Ok(skating as f64 / n as f64)
}

/// Largest second-difference magnitude over joints and frames, m/s².
pub fn max_acceleration(pos: &PositionSequence, fps: f64) -> Result<f64, MetricsError> {
    let n = pos.frame_count();
    if n < 3 {
        return Err(MetricsError::TooShort { what: "acceleration", needed: 3, frames: n });
    }
    let mut best = 0.0f64;
    for t in 0..n - 2 {
        for j in 0..pos.joint_count() {
            let (a, b, c) = (pos.pos[t][j], pos.pos[t + 1][j], pos.pos[t + 2][j]);
            let d = [c[0] - 2.0 * b[0] + a[0], c[1] - 2.0 * b[1] + a[1], c[2] - 2.0 * b[2] + a[2]];
            best = best.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() * fps * fps);
        }
    }
    Ok(best)
}

/// Bone checked by [`bone_length_incorrect_ratio`]: the segment from
/// `joint`'s parent to `joint`, expected `template` meters long.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoneCheck {
    pub joint: usize,
    pub template: f64,
    pub tolerance: f64,
}

impl BoneCheck {
    /// The neck bone of `skeleton` at its template length.
    pub fn neck(skeleton: &Skeleton) -> Self {
        let joint = skeleton.head_joint;
        Self { joint, template: skeleton.bone_length(joint), tolerance: BONE_TOLERANCE }
    }
}

/// Fraction of `frames` (all frames when `None`) whose bone length lies
/// outside `template ± tolerance`.
pub fn bone_length_incorrect_ratio(
    pos: &PositionSequence,
    skeleton: &Skeleton,
    bone: BoneCheck,
    frames: Option<&[usize]>,
) -> Result<f64, MetricsError> {
    let parent = skeleton.parent(bone.joint).ok_or(MetricsError::Joint(bone.joint))?;
    let all: Vec<usize> = (0..pos.frame_count()).collect();
    let frames = frames.unwrap_or(&all);
    if frames.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut bad = 0usize;
    for &t in frames {
        let f = pos.pos.get(t).ok_or(MetricsError::TooShort { what: "bone check", needed: t + 1, frames: pos.frame_count() })?;
        let (a, b) = (f[bone.joint], f[parent]);
        let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        if !(len >= bone.template - bone.tolerance && len <= bone.template + bone.tolerance) {
            bad += 1;
        }
    }
    Ok(bad as f64 / frames.len() as f64)
}

/// Fraction of constraint errors above `threshold`.
pub fn unsuccess_rate(errors: &[f64], threshold: f64) -> Result<f64, MetricsError> {
    if errors.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(errors.iter().filter(|&&e| !(e <= threshold)).count() as f64 / errors.len() as f64)
}

/// How a task turns its program into a constraint error in meters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorFormula {
    /// The weighted program total.
    Total,
    /// Mean of the unweighted values of the positively weighted terms.
    TermMean,
}

impl ErrorFormula {
    pub fn id(self) -> &'static str {
        match self {
            ErrorFormula::Total => "total",
            ErrorFormula::TermMean => "term_mean",
        }
    }
}

/// Constraint error of `motion` under `program` with resolved `params`.
pub fn constraint_error(
    program: &ErrorProgram,
    params: &[ParamValue],
    formula: ErrorFormula,
    motion: &MotionSequence,
) -> Result<f64, MetricsError> {
    let ev = program.evaluate_flat(&motion.flatten(), motion.frame_count(), motion.fps, params)?;
    Ok(match formula {
        ErrorFormula::Total => ev.total,
        ErrorFormula::TermMean => {
            let weights = program.weights(params)?;
            let raw: Vec<f64> =
                ev.per_term.iter().zip(&weights).filter(|(_, &w)| w > 0.0).map(|(v, w)| v / w).collect();
            if raw.is_empty() {
                0.0
            } else {
                raw.iter().sum::<f64>() / raw.len() as f64
            }
        }
    })
}

/// Metric bundle for one motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub id: String,
    pub foot_skate_ratio: f64,
    pub max_acceleration: f64,
    pub constraint_error: Option<f64>,
    pub success: Option<bool>,
    pub bone_length_incorrect_ratio: f64,
}

/// Settings for [`evaluate`].
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsConfig {
    pub foot_joints: Option<Vec<usize>>,
    pub h_thresh: f64,
    pub v_thresh: f64,
    pub bone: Option<BoneCheck>,
    pub bone_frames: Option<Vec<usize>>,
    pub success_threshold: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            foot_joints: None,
            h_thresh: FOOT_HEIGHT_THRESHOLD,
            v_thresh: FOOT_SPEED_THRESHOLD,
            bone: None,
            bone_frames: None,
            success_threshold: SUCCESS_THRESHOLD,
        }
    }
}

/// Full report from precomputed positions; `constraint_error` comes from
/// the task when there is one.
pub fn evaluate(
    id: &str,
    skeleton: &Skeleton,
    pos: &PositionSequence,
    fps: f64,
    constraint_error: Option<f64>,
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricsError> {
    let feet = config.foot_joints.as_deref().unwrap_or(&skeleton.foot_joints);
    Ok(MetricsReport {
        id: id.to_owned(),
        foot_skate_ratio: foot_skate_ratio(pos, feet, fps, config.h_thresh, config.v_thresh)?,
        max_acceleration: max_acceleration(pos, fps)?,
        constraint_error,
        success: constraint_error.map(|e| e <= config.success_threshold),
        bone_length_incorrect_ratio: bone_length_incorrect_ratio(
            pos,
            skeleton,
            config.bone.unwrap_or_else(|| BoneCheck::neck(skeleton)),
            config.bone_frames.as_deref(),
        )?,
    })
}

/// [`evaluate`] after forward kinematics.
pub fn evaluate_motion(
    id: &str,
    skeleton: &Skeleton,
    motion: &MotionSequence,
    constraint_error: Option<f64>,
    config: &MetricsConfig,
) -> Result<MetricsReport, MetricsError> {
    let pos = forward_kinematics(skeleton, motion).map_err(|e| MetricsError::Eval(e.into()))?;
    evaluate(id, skeleton, &pos, motion.fps, constraint_error, config)
}

pub const CSV_HEADER: &str = "id,Foot Skate,Max Acc.,C.Err,Success,Bone Incorrect";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.id,
            self.foot_skate_ratio,
            self.max_acceleration,
            opt(self.constraint_error),
            opt(self.success),
            self.bone_length_incorrect_ratio
        )
    }
}

/// Header plus one row per report.
pub fn write_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn write_json(reports: &[MetricsReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::compile_source;
    use crate::kinematics::{default_skeleton, yaw_translate};
    use crate::priors::{synth_walk, GaitParams};

    fn positions(m: &MotionSequence) -> PositionSequence {
        forward_kinematics(&default_skeleton(), m).unwrap()
    }

    #[test]
    fn standing_still_does_not_skate() {
        let m = MotionSequence::rest(10, 22, 20.0);
        let mut m = m;
        for f in &mut m.frames {
            f.root_pos = [0.0, 0.92, 0.0];
        }
        let pos = positions(&m);
        assert_eq!(foot_skate_ratio(&pos, &[10, 11], 20.0, 0.05, 0.5).unwrap(), 0.0);
        assert_eq!(max_acceleration(&pos, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn grounded_slide_skates_every_frame() {
        let mut m = MotionSequence::rest(10, 22, 20.0);
        for (t, f) in m.frames.iter_mut().enumerate() {
            f.root_pos = [0.05 * t as f64, 0.92, 0.0];
        }
        assert_eq!(foot_skate_ratio(&positions(&m), &[10, 11], 20.0, 0.05, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn clean_gait_does_not_skate() {
        let p = GaitParams { stride: 0.6, cadence: 1.8, hip_sway: 0.02, arm_swing: 0.3, ground_height: 0.0 };
        let w = synth_walk(&p, 0.7, 0.2, 80, 20.0).unwrap();
        let pos = positions(&w.motion);
        // generator stance mask as the oracle: stance toes never slide
        for (t, st) in w.stance.iter().enumerate().take(79) {
            for (k, toe) in [10, 11].into_iter().enumerate() {
                if st[k] && w.stance[t + 1][k] {
                    let (a, b) = (pos.pos[t][toe], pos.pos[t + 1][toe]);
                    assert!((a[0] - b[0]).hypot(a[2] - b[2]) * 20.0 < 0.5);
                }
            }
        }
        // only frames next to a contact change may still register
        let near_switch = (0..80usize)
            .filter(|&t| (t.saturating_sub(1)..(t + 2).min(80)).any(|u| u + 1 < 80 && w.stance[u] != w.stance[u + 1]))
            .count();
        let r = foot_skate_ratio(&pos, &[10, 11], 20.0, 0.05, 0.5).unwrap();
        assert!(r <= near_switch as f64 / 80.0, "{r}");
    }

    #[test]
    fn single_frame_jump_acceleration() {
        let mut m = MotionSequence::rest(6, 22, 20.0);
        for f in &mut m.frames[3..] {
            f.root_pos[0] += 0.1;
        }
        let a = max_acceleration(&positions(&m), 20.0).unwrap();
        assert!((a - 40.0).abs() < 1e-9, "{a}");
        assert!(max_acceleration(&positions(&MotionSequence::rest(2, 22, 20.0)), 20.0).is_err());
    }

    #[test]
    fn bone_ratio_cases() {
        let skel = default_skeleton();
        let mut pos = positions(&MotionSequence::rest(4, 22, 20.0));
        let neck = BoneCheck::neck(&skel);
        assert_eq!(neck.template, 0.08);
        assert_eq!(bone_length_incorrect_ratio(&pos, &skel, neck, None).unwrap(), 0.0);
        for f in &mut pos.pos[..2] {
            f[15][1] = f[12][1] + 0.12;
        }
        assert_eq!(bone_length_incorrect_ratio(&pos, &skel, neck, None).unwrap(), 0.5);
        assert_eq!(bone_length_incorrect_ratio(&pos, &skel, neck, Some(&[0, 1])).unwrap(), 1.0);
        assert!(bone_length_incorrect_ratio(&pos, &skel, BoneCheck { joint: 0, ..neck }, None).is_err());
    }

    #[test]
    fn unsuccess_cases() {
        assert_eq!(unsuccess_rate(&[0.0, 0.0], SUCCESS_THRESHOLD).unwrap(), 0.0);
        assert_eq!(unsuccess_rate(&[1.0, 1.0], SUCCESS_THRESHOLD).unwrap(), 1.0);
        assert_eq!(unsuccess_rate(&[0.01, 0.06], SUCCESS_THRESHOLD).unwrap(), 0.5);
        assert!(unsuccess_rate(&[], SUCCESS_THRESHOLD).is_err());
    }

    #[test]
    fn term_mean_ignores_weights() {
        let skel = default_skeleton();
        let p = compile_source(
            "task \"t\" {
                constraint frame first: joint(pelvis).pos.y == 1 weight 3;
                constraint frame last: joint(pelvis).pos.y == 0.5;
                constraint all frames: joint(pelvis).pos.y == 7 weight 0;
            }",
            &skel,
        )
        .unwrap();
        let params = p.resolve_params(&Default::default()).unwrap();
        let mut m = MotionSequence::rest(3, 22, 20.0);
        for f in &mut m.frames {
            f.root_pos[1] = 0.9;
        }
        let mean = constraint_error(&p, &params, ErrorFormula::TermMean, &m).unwrap();
        assert!((mean - 0.25).abs() < 1e-12);
        let total = constraint_error(&p, &params, ErrorFormula::Total, &m).unwrap();
        assert!((total - 0.7).abs() < 1e-12);
    }

    #[test]
    fn report_is_yaw_invariant_and_serializes() {
        let p = GaitParams { stride: 0.5, cadence: 2.0, hip_sway: 0.01, arm_swing: 0.2, ground_height: 0.0 };
        let m = synth_walk(&p, 0.0, 0.0, 30, 20.0).unwrap().motion;
        let skel = default_skeleton();
        let cfg = MetricsConfig::default();
        let a = evaluate_motion("a", &skel, &m, Some(0.01), &cfg).unwrap();
        let b = evaluate_motion("a", &skel, &yaw_translate(&m, 1.3, -0.4, 2.1), Some(0.01), &cfg).unwrap();
        assert!((a.max_acceleration - b.max_acceleration).abs() < 1e-9);
        assert_eq!(a.foot_skate_ratio, b.foot_skate_ratio);
        assert_eq!(a.success, Some(true));
        let csv = write_csv(std::slice::from_ref(&a));
        assert!(csv.starts_with("id,Foot Skate,Max Acc.,C.Err"));
        let back: Vec<MetricsReport> = serde_json::from_str(&write_json(std::slice::from_ref(&a))).unwrap();
        assert_eq!(back, vec![a]);
    }
}
