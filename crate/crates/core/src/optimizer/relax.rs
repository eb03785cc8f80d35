use serde::{Deserialize, Serialize};

use super::{seeds, setup, OptimConfig, OptimError, OptimResult};
use crate::dsl::{ErrorProgram, ParamValue, Params};
use crate::dsl::ast::ParamType;
use crate::kinematics::{forward_kinematics, MotionSequence, Skeleton, YawTranslate};
use crate::priors::MotionPrior;

/// Which constraint parameters may follow the motion during optimization.
///
/// Each variant names the program parameters it rewrites; joint names are
/// resolved against the program's skeleton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelaxSpec {
    None,
    /// Vertical plane through the joint's trajectory. `normal` is a vec3
    /// parameter, `offset` a float with `normal · p = offset`.
    PlaneFit { joint: String, normal: String, offset: String },
    /// Horizontal line through the joints' trajectories. `origin` keeps its
    /// height.
    LineFit { joints: Vec<String>, origin: String, direction: String },
    /// Keyframe targets `a` (first frame) and `b` (last frame) slide along
    /// the generated start-to-end direction, keeping their separation.
    EndpointPair { joint: String, a: String, b: String },
}

impl RelaxSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, RelaxSpec::None)
    }
}

pub(super) enum Resolved {
    Plane { joint: usize, normal: usize, offset: usize },
    Line { joints: Vec<usize>, origin: usize, direction: usize },
    Endpoints { joint: usize, a: usize, b: usize },
}

fn err<T>(msg: impl Into<String>) -> Result<T, OptimError> {
    Err(OptimError::Relax(msg.into()))
}

fn vec3(v: ParamValue) -> [f64; 3] {
    match v {
        ParamValue::Vec3(v) => v,
        ParamValue::Float(_) => unreachable!("types checked at resolution"),
    }
}

fn float(v: ParamValue) -> f64 {
    match v {
        ParamValue::Float(f) => f,
        ParamValue::Vec3(_) => unreachable!("types checked at resolution"),
    }
}

fn heading([x, _, z]: [f64; 3]) -> f64 {
    x.atan2(z)
}

fn rotate(angle: f64, [x, y, z]: [f64; 3]) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * x + s * z, y, -s * x + c * z]
}

fn horizontal_unit(v: [f64; 3], what: &str) -> Result<[f64; 3], OptimError> {
    let h = v[0].hypot(v[2]);
    if h < 1e-12 || v[1].abs() > 1e-9 * h.max(1.0) {
        return err(format!("{what} must be a nonzero horizontal vector"));
    }
    Ok([v[0] / h, 0.0, v[2] / h])
}

/// Least-squares line through points projected on the ground plane:
/// centroid and unit direction in xz, or `None` when the points coincide.
pub fn fit_line_xz(points: &[[f64; 3]]) -> Option<([f64; 3], [f64; 3])> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cz = points.iter().map(|p| p[2]).sum::<f64>() / n;
    let (mut sxx, mut sxz, mut szz) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dz) = (p[0] - cx, p[2] - cz);
        sxx += dx * dx;
        sxz += dx * dz;
        szz += dz * dz;
    }
    if sxx + szz < 1e-18 {
        return None;
    }
    // principal axis of the 2×2 scatter matrix
    let angle = 0.5 * (2.0 * sxz).atan2(sxx - szz);
    Some(([cx, 0.0, cz], [angle.cos(), 0.0, angle.sin()]))
}

/// Vertical plane best fitting the points: unit normal in xz and offset.
pub fn fit_vertical_plane(points: &[[f64; 3]]) -> Option<([f64; 3], f64)> {
    let (c, d) = fit_line_xz(points)?;
    let n = [-d[2], 0.0, d[0]];
    Some((n, n[0] * c[0] + n[2] * c[2]))
}

/// Moves targets `a`, `b` onto the generated start-to-end direction with
/// the same midpoint as the generated endpoints `a_hat`, `b_hat` and the
/// original horizontal separation. Heights are kept. `None` when the
/// generated endpoints coincide horizontally.
pub fn endpoint_relax(
    a_hat: [f64; 3],
    b_hat: [f64; 3],
    a: [f64; 3],
    b: [f64; 3],
) -> Option<([f64; 3], [f64; 3])> {
    let p = [(a_hat[0] + b_hat[0]) / 2.0, (a_hat[2] + b_hat[2]) / 2.0];
    let d = [a_hat[0] - p[0], a_hat[2] - p[1]];
    let len = d[0].hypot(d[1]);
    if len < 1e-9 {
        return None;
    }
    let half = (a[0] - b[0]).hypot(a[2] - b[2]) / 2.0;
    let u = [d[0] / len * half, d[1] / len * half];
    Some(([p[0] + u[0], a[1], p[1] + u[1]], [p[0] - u[0], b[1], p[1] - u[1]]))
}

impl Resolved {
    pub(super) fn new(spec: &RelaxSpec, program: &ErrorProgram) -> Result<Option<Self>, OptimError> {
        let skel = program.skeleton();
        let joint = |name: &str| skel.joint_index(name).ok_or_else(|| OptimError::Relax(format!("unknown joint '{name}'")));
        let param = |name: &str, ty: ParamType| {
            program
                .param_defs()
                .position(|(n, t, _)| n == name && t == ty)
                .ok_or_else(|| OptimError::Relax(format!("program has no {ty:?} parameter '{name}'")))
        };
        Ok(Some(match spec {
            RelaxSpec::None => return Ok(None),
            RelaxSpec::PlaneFit { joint: j, normal, offset } => Resolved::Plane {
                joint: joint(j)?,
                normal: param(normal, ParamType::Vec3)?,
                offset: param(offset, ParamType::Float)?,
            },
            RelaxSpec::LineFit { joints, origin, direction } => {
                if joints.is_empty() {
                    return err("line fit needs at least one joint");
                }
                Resolved::Line {
                    joints: joints.iter().map(|j| joint(j)).collect::<Result<_, _>>()?,
                    origin: param(origin, ParamType::Vec3)?,
                    direction: param(direction, ParamType::Vec3)?,
                }
            }
            RelaxSpec::EndpointPair { joint: j, a, b } => Resolved::Endpoints {
                joint: joint(j)?,
                a: param(a, ParamType::Vec3)?,
                b: param(b, ParamType::Vec3)?,
            },
        }))
    }

    /// Checks that the original parameters describe geometry the transform
    /// family can reach.
    pub(super) fn check(&self, params: &[ParamValue]) -> Result<(), OptimError> {
        match *self {
            Resolved::Plane { normal, .. } => horizontal_unit(vec3(params[normal]), "plane normal").map(|_| ()),
            Resolved::Line { direction, .. } => horizontal_unit(vec3(params[direction]), "line direction").map(|_| ()),
            Resolved::Endpoints { .. } => Ok(()),
        }
    }

    /// Refits the relaxed parameters to `motion`; degenerate fits keep the
    /// previous values.
    pub(super) fn refit(
        &self,
        skel: &Skeleton,
        motion: &MotionSequence,
        params: &mut [ParamValue],
    ) -> Result<(), OptimError> {
        let pos = forward_kinematics(skel, motion)?;
        match self {
            Resolved::Plane { joint, normal, offset } => {
                let pts: Vec<[f64; 3]> = pos.pos.iter().map(|f| f[*joint]).collect();
                if let Some((mut n, mut d)) = fit_vertical_plane(&pts) {
                    let n0 = vec3(params[*normal]);
                    if n[0] * n0[0] + n[2] * n0[2] < 0.0 {
                        n = [-n[0], 0.0, -n[2]];
                        d = -d;
                    }
                    params[*normal] = ParamValue::Vec3(n);
                    params[*offset] = ParamValue::Float(d);
                }
            }
            Resolved::Line { joints, origin, direction } => {
                let pts: Vec<[f64; 3]> = pos.pos.iter().flat_map(|f| joints.iter().map(|&j| f[j])).collect();
                if let Some((c, mut u)) = fit_line_xz(&pts) {
                    let u0 = vec3(params[*direction]);
                    if u[0] * u0[0] + u[2] * u0[2] < 0.0 {
                        u = [-u[0], 0.0, -u[2]];
                    }
                    let y = vec3(params[*origin])[1];
                    params[*origin] = ParamValue::Vec3([c[0], y, c[2]]);
                    params[*direction] = ParamValue::Vec3(u);
                }
            }
            Resolved::Endpoints { joint, a, b } => {
                let (first, last) = (pos.pos[0][*joint], pos.pos[pos.frame_count() - 1][*joint]);
                if let Some((ar, br)) = endpoint_relax(first, last, vec3(params[*a]), vec3(params[*b])) {
                    params[*a] = ParamValue::Vec3(ar);
                    params[*b] = ParamValue::Vec3(br);
                }
            }
        }
        Ok(())
    }

    /// Rigid horizontal transform taking the relaxed geometry onto the
    /// original one.
    pub(super) fn transform(&self, relaxed: &[ParamValue], original: &[ParamValue]) -> Result<YawTranslate, OptimError> {
        let make = |dyaw: f64, t: [f64; 2]| YawTranslate { pivot: [0.0; 3], dx: t[0], dz: t[1], dyaw };
        Ok(match *self {
            Resolved::Plane { normal, offset, .. } => {
                let n0 = vec3(original[normal]);
                let scale = (n0[0] * n0[0] + n0[1] * n0[1] + n0[2] * n0[2]).sqrt();
                let n0 = horizontal_unit(n0, "plane normal")?;
                let d0 = float(original[offset]) / scale;
                let nr = horizontal_unit(vec3(relaxed[normal]), "plane normal")?;
                let dr = float(relaxed[offset]);
                let yaw = heading(n0) - heading(nr);
                make(yaw, [(d0 - dr) * n0[0], (d0 - dr) * n0[2]])
            }
            Resolved::Line { origin, direction, .. } => {
                let u0 = horizontal_unit(vec3(original[direction]), "line direction")?;
                let ur = horizontal_unit(vec3(relaxed[direction]), "line direction")?;
                let yaw = heading(u0) - heading(ur);
                let o0 = vec3(original[origin]);
                let or = rotate(yaw, vec3(relaxed[origin]));
                let delta = [o0[0] - or[0], o0[2] - or[2]];
                let along = delta[0] * u0[0] + delta[1] * u0[2];
                make(yaw, [delta[0] - along * u0[0], delta[1] - along * u0[2]])
            }
            Resolved::Endpoints { a, b, .. } => {
                let (a0, b0) = (vec3(original[a]), vec3(original[b]));
                let (ar, br) = (vec3(relaxed[a]), vec3(relaxed[b]));
                let d0 = [b0[0] - a0[0], 0.0, b0[2] - a0[2]];
                let dr = [br[0] - ar[0], 0.0, br[2] - ar[2]];
                let yaw = if d0[0].hypot(d0[2]) < 1e-12 || dr[0].hypot(dr[2]) < 1e-12 {
                    0.0
                } else {
                    heading(d0) - heading(dr)
                };
                let mr = rotate(yaw, [(ar[0] + br[0]) / 2.0, 0.0, (ar[2] + br[2]) / 2.0]);
                make(yaw, [(a0[0] + b0[0]) / 2.0 - mr[0], (a0[2] + b0[2]) / 2.0 - mr[2]])
            }
        })
    }
}

/// Relax-and-minimize: every `config.relax_interval` steps the relaxed
/// parameters are refitted to the decoded motion, and the final motion is
/// moved by the yaw and translation that carries the relaxed constraint
/// back onto the original. Errors are reported against the original.
pub fn relax_and_minimize(
    prior: &dyn MotionPrior,
    program: &ErrorProgram,
    params: &Params,
    relax: &RelaxSpec,
    config: &OptimConfig,
) -> Result<OptimResult, OptimError> {
    let mut s = setup(prior, program, params, config, 0.0)?;
    s.relax = Resolved::new(relax, program)?;
    if let Some(r) = &s.relax {
        r.check(&s.params)?;
    }
    s.search(&seeds(prior, config, config.restarts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::compile_source;
    use crate::kinematics::{apply_yaw_translate, default_skeleton};
    use crate::priors::DctPrior;

    #[test]
    fn symmetric_endpoint_case() {
        let (ar, br) = endpoint_relax([2.0, 0.0, 0.0], [-2.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]).unwrap();
        assert_eq!(ar, [1.0, 0.0, 0.0]);
        assert_eq!(br, [-1.0, 0.0, 0.0]);
        assert!(endpoint_relax([1.0, 0.0, 1.0], [1.0, 5.0, 1.0], [0.0; 3], [1.0; 3]).is_none());
    }

    #[test]
    fn plane_fit_recovers_plane() {
        let n = [0.6f64, 0.0, 0.8];
        let pts: Vec<[f64; 3]> = (0..20)
            .map(|i| {
                let s = i as f64 * 0.1;
                [n[0] * 1.5 - n[2] * s, 0.3 * (i % 3) as f64, n[2] * 1.5 + n[0] * s]
            })
            .collect();
        let (fitted, d) = fit_vertical_plane(&pts).unwrap();
        let sign = fitted[0] * n[0] + fitted[2] * n[2];
        assert!((sign.abs() - 1.0).abs() < 1e-12);
        assert!((d * sign - 1.5).abs() < 1e-12);
        for p in &pts {
            assert!((fitted[0] * p[0] + fitted[2] * p[2] - d).abs() < 1e-12);
        }
        assert!(fit_vertical_plane(&[[1.0, 2.0, 3.0]; 4]).is_none());
    }

    fn geo1() -> ErrorProgram {
        compile_source(
            "task \"wall\" {
                param n: vec3 = [0, 0, 1];
                param d: float = 2;
                constraint all frames: distToPlane(joint(left_hand).pos, plane(n, d)) == 0;
            }",
            &default_skeleton(),
        )
        .unwrap()
    }

    fn plane_spec() -> RelaxSpec {
        RelaxSpec::PlaneFit { joint: "left_hand".into(), normal: "n".into(), offset: "d".into() }
    }

    /// Error of the back-transformed motion against the original plane
    /// equals the relaxed-frame error of the untransformed motion.
    #[test]
    fn back_transform_preserves_error() {
        let prior = DctPrior::new(default_skeleton(), 16, 4, 20.0).unwrap();
        let program = geo1();
        let cfg = OptimConfig { steps: 25, seed: 5, relax_interval: 5, ..Default::default() };
        let r = relax_and_minimize(&prior, &program, &Params::new(), &plane_spec(), &cfg).unwrap();
        let best = r.best();
        let untransformed = prior.decode(&best.latent).unwrap();
        let relaxed_err = program
            .evaluate_flat(&untransformed.flatten(), 16, 20.0, &best.relaxed_params)
            .unwrap()
            .total;
        assert!((relaxed_err - best.constraint_error).abs() < 1e-6, "{relaxed_err} vs {}", best.constraint_error);
        assert_eq!(best.trace.len(), 26);
        let again = apply_yaw_translate(&untransformed, &best.transform);
        assert_eq!(&again, r.motion());
    }

    #[test]
    fn coplanar_trajectory_is_a_fixed_point() {
        let program = geo1();
        let r = Resolved::new(&plane_spec(), &program).unwrap().unwrap();
        let original = program.resolve_params(&Params::new()).unwrap();
        let mut m = MotionSequence::rest(6, 22, 20.0);
        let skel = default_skeleton();
        let hand = skel.rest_positions()[20];
        for (i, f) in m.frames.iter_mut().enumerate() {
            f.root_pos = [0.3 * i as f64, 0.9, 2.0 - hand[2]];
        }
        let mut params = original.clone();
        r.refit(&skel, &m, &mut params).unwrap();
        let t = r.transform(&params, &original).unwrap();
        assert!(t.dyaw.abs() < 1e-12 && t.dx.abs() < 1e-12 && t.dz.abs() < 1e-12, "{t:?}");
    }

    #[test]
    fn line_and_endpoint_transforms_map_geometry() {
        let program = compile_source(
            "task \"t\" {
                param o: vec3 = [0, 0, 0]; param u: vec3 = [1, 0, 0];
                param a: vec3 = [1, 0.8, 1]; param b: vec3 = [-1, 0.8, -1];
                constraint all frames: distToLine(joint(left_foot).pos, line(o, u)) == 0;
                constraint frame first: joint(left_hand).pos == a;
                constraint frame last: joint(left_hand).pos == b;
            }",
            &default_skeleton(),
        )
        .unwrap();
        let original = program.resolve_params(&Params::new()).unwrap();
        let mut relaxed = original.clone();
        relaxed[0] = ParamValue::Vec3([3.0, 0.0, -1.0]);
        relaxed[1] = ParamValue::Vec3([0.6, 0.0, 0.8]);
        let line = Resolved::new(
            &RelaxSpec::LineFit { joints: vec!["left_foot".into()], origin: "o".into(), direction: "u".into() },
            &program,
        )
        .unwrap()
        .unwrap();
        let t = line.transform(&relaxed, &original).unwrap();
        let p = t.apply_point([3.0 + 0.6 * 2.0, 0.0, -1.0 + 0.8 * 2.0]);
        assert!(p[2].abs() < 1e-12 && p[1].abs() < 1e-12, "{p:?}");
        let d = t.apply_direction([0.6, 0.0, 0.8]);
        assert!((d[0] - 1.0).abs() < 1e-12);

        let (ar, br) = endpoint_relax([4.0, 1.0, 2.0], [4.0, 0.5, 5.0], [1.0, 0.8, 1.0], [-1.0, 0.8, -1.0]).unwrap();
        relaxed[2] = ParamValue::Vec3(ar);
        relaxed[3] = ParamValue::Vec3(br);
        let ends = Resolved::new(&RelaxSpec::EndpointPair { joint: "left_hand".into(), a: "a".into(), b: "b".into() }, &program)
            .unwrap()
            .unwrap();
        let t = ends.transform(&relaxed, &original).unwrap();
        for (r, o) in [(ar, [1.0, 0.8, 1.0]), (br, [-1.0, 0.8, -1.0])] {
            let q = t.apply_point(r);
            assert!((0..3).all(|i| (q[i] - o[i]).abs() < 1e-12), "{q:?} vs {o:?}");
        }
    }

    #[test]
    fn spec_validation() {
        let program = geo1();
        assert!(Resolved::new(&RelaxSpec::PlaneFit { joint: "nose".into(), normal: "n".into(), offset: "d".into() }, &program).is_err());
        assert!(Resolved::new(&RelaxSpec::PlaneFit { joint: "head".into(), normal: "d".into(), offset: "n".into() }, &program).is_err());
        assert!(Resolved::new(&RelaxSpec::None, &program).unwrap().is_none());
    }
}
