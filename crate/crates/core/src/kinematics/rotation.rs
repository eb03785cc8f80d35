//! Axis-angle rotations.

use std::f64::consts::{PI, TAU};

use crate::autodiff::{AdError, Mat3, Scalar};

/// Below this squared angle the Rodrigues coefficients use their Taylor
/// expansions, which stay smooth through θ = 0.
const SMALL_ANGLE_SQ: f64 = 1e-6;

/// Rotation matrix of an axis-angle vector, differentiable everywhere
/// including the zero rotation.
pub fn axis_angle_matrix<S: Scalar>(r: [S; 3]) -> Result<Mat3<S>, AdError> {
    let [x, y, z] = r;
    let t2 = x * x + y * y + z * z;
    let (a, b) = if t2.value() < SMALL_ANGLE_SQ {
        // sin θ/θ and (1 − cos θ)/θ²
        let t4 = t2 * t2;
        (t2 * (-1.0 / 6.0) + t4 * (1.0 / 120.0) + 1.0, t2 * (-1.0 / 24.0) + t4 * (1.0 / 720.0) + 0.5)
    } else {
        let t = t2.sqrt()?;
        let inv_t = t.recip_checked()?;
        let inv_t2 = inv_t * inv_t;
        (t.sin() * inv_t, (-t.cos() + 1.0) * inv_t2)
    };
    // R = I + a K + b K², K = [r]×
    let xx = x * x;
    let yy = y * y;
    let zz = z * z;
    let xy = x * y;
    let xz = x * z;
    let yz = y * z;
    let ax = a * x;
    let ay = a * y;
    let az = a * z;
    Ok(Mat3 {
        m: [
            [-(b * (yy + zz)) + 1.0, b * xy - az, b * xz + ay],
            [b * xy + az, -(b * (xx + zz)) + 1.0, b * yz - ax],
            [b * xz - ay, b * yz + ax, -(b * (xx + yy)) + 1.0],
        ],
    })
}

pub fn matrix_from_axis_angle(r: [f64; 3]) -> [[f64; 3]; 3] {
    axis_angle_matrix(r).expect("f64 rotation is total").m
}

/// Axis-angle of a rotation matrix with angle in [0, π].
pub fn axis_angle_from_matrix(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let q = quaternion_from_matrix(m);
    let [w, x, y, z] = q;
    let s = (x * x + y * y + z * z).sqrt();
    if s < 1e-15 {
        return [0.0; 3];
    }
    let angle = 2.0 * s.atan2(w);
    let (angle, sign) = if angle > PI { (TAU - angle, -1.0) } else { (angle, 1.0) };
    let k = sign * angle / s;
    [x * k, y * k, z * k]
}

/// Unit quaternion (w, x, y, z) of a rotation matrix.
fn quaternion_from_matrix(m: &[[f64; 3]; 3]) -> [f64; 4] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
    } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
        let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
        [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
    } else if m[1][1] > m[2][2] {
        let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
        [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
    } else {
        let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
        [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
    };
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.map(|v| v / n)
}

/// Wraps the rotation angle into [0, 2π) keeping the axis.
pub fn canonicalize(r: [f64; 3]) -> [f64; 3] {
    let t = f64::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    if t < TAU || t == 0.0 {
        return r;
    }
    let wrapped = t.rem_euclid(TAU);
    let k = wrapped / t;
    r.map(|v| v * k)
}

pub fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

pub fn mat_apply(a: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| a[r][0] * v[0] + a[r][1] * v[1] + a[r][2] * v[2])
}

/// Rotation about +y.
pub fn yaw_matrix(angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

/// Intrinsic Z-Y-X Euler angles (radians) with R = Rz · Ry · Rx.
pub fn euler_zyx_from_matrix(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let sy = (-m[2][0]).clamp(-1.0, 1.0);
    let y = sy.asin();
    if sy.abs() < 1.0 - 1e-12 {
        [m[1][0].atan2(m[0][0]), y, m[2][1].atan2(m[2][2])]
    } else {
        // gimbal lock: fold x into z
        [(-m[0][1]).atan2(m[1][1]), y, 0.0]
    }
}

pub fn matrix_from_euler_zyx([z, y, x]: [f64; 3]) -> [[f64; 3]; 3] {
    let rz = matrix_from_axis_angle([0.0, 0.0, z]);
    let ry = matrix_from_axis_angle([0.0, y, 0.0]);
    let rx = matrix_from_axis_angle([x, 0.0, 0.0]);
    mat_mul(&mat_mul(&rz, &ry), &rx)
}
