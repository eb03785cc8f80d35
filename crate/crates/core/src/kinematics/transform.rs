use super::rotation::{axis_angle_from_matrix, mat_apply, mat_mul, matrix_from_axis_angle, yaw_matrix};
use super::MotionSequence;

/// Rigid horizontal-plane transform: rotate by `dyaw` about the vertical
/// axis through `pivot`, then translate by `(dx, 0, dz)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YawTranslate {
    pub pivot: [f64; 3],
    pub dx: f64,
    pub dz: f64,
    pub dyaw: f64,
}

impl YawTranslate {
    pub fn identity() -> Self {
        Self { pivot: [0.0; 3], dx: 0.0, dz: 0.0, dyaw: 0.0 }
    }

    pub fn apply_point(&self, p: [f64; 3]) -> [f64; 3] {
        let r = yaw_matrix(self.dyaw);
        let local = [p[0] - self.pivot[0], p[1], p[2] - self.pivot[2]];
        let q = mat_apply(&r, local);
        [q[0] + self.pivot[0] + self.dx, q[1], q[2] + self.pivot[2] + self.dz]
    }

    /// Rotates a direction (no translation).
    pub fn apply_direction(&self, d: [f64; 3]) -> [f64; 3] {
        mat_apply(&yaw_matrix(self.dyaw), d)
    }
}

/// Rotates the motion by `dyaw` about the vertical axis through the
/// first-frame root, then shifts it by `(dx, 0, dz)`.
///
/// Forward kinematics of the result equals the same rigid transform applied
/// to forward kinematics of the input.
pub fn yaw_translate(motion: &MotionSequence, dx: f64, dz: f64, dyaw: f64) -> MotionSequence {
    let pivot = motion.frames.first().map_or([0.0; 3], |f| f.root_pos);
    apply_yaw_translate(motion, &YawTranslate { pivot, dx, dz, dyaw })
}

/// Same as [`yaw_translate`] with an explicit pivot.
pub fn apply_yaw_translate(motion: &MotionSequence, t: &YawTranslate) -> MotionSequence {
    let yaw = yaw_matrix(t.dyaw);
    let mut out = motion.clone();
    for f in &mut out.frames {
        f.root_pos = t.apply_point(f.root_pos);
        if let Some(r0) = f.joint_rot.first_mut() {
            if t.dyaw != 0.0 {
                let m = mat_mul(&yaw, &matrix_from_axis_angle(*r0));
                *r0 = axis_angle_from_matrix(&m);
            }
        }
    }
    out
}
