//! Atomic constraint errors and the logical operators that combine them.
//!
//! Everything here is generic over [`Scalar`]: the same code evaluates plain
//! values for metrics and records a tape for optimization. Trajectories are
//! slices of [`Vec3`], full position sequences are indexed `[frame][joint]`.

use crate::autodiff::{AdError, Scalar, Vec3};
use crate::kinematics::{difference_trajectory, KinematicsError, Skeleton};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AtomError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("difference order {order} needs more than {frames} frames")]
    DifferenceOrder { order: usize, frames: usize },
    #[error("degenerate primitive: {0}")]
    DegeneratePrimitive(String),
    #[error("support region is empty")]
    EmptySupport,
    #[error("frame {index} out of range for {frames} frames")]
    FrameOutOfRange { index: i64, frames: usize },
    #[error("empty frame selection")]
    EmptySelection,
    #[error("invalid norm order {0}")]
    NormOrder(f64),
    #[error("{0} bone masses for {1} bones")]
    MassCount(usize, usize),
    #[error(transparent)]
    Numeric(#[from] AdError),
}

impl From<KinematicsError> for AtomError {
    fn from(e: KinematicsError) -> Self {
        match e {
            KinematicsError::DifferenceOrder { order, frames } => AtomError::DifferenceOrder { order, frames },
            other => AtomError::DegeneratePrimitive(other.to_string()),
        }
    }
}

/// Arithmetic mean as one tape node.
pub fn mean<S: Scalar>(values: &[S]) -> Result<S, AtomError> {
    let first = *values.first().ok_or(AtomError::EmptySelection)?;
    let w = 1.0 / values.len() as f64;
    let terms: Vec<(S, f64)> = values.iter().map(|&v| (v, w)).collect();
    Ok(S::linear_combination(first, &terms, 0.0))
}

/// L-n norm of a 3-vector; `n = 2` and `n = 1` take dedicated paths.
pub fn lp_norm<S: Scalar>(v: Vec3<S>, n: f64) -> Result<S, AtomError> {
    if n == 2.0 {
        Ok(v.norm())
    } else if n == 1.0 {
        Ok(v.x.abs() + v.y.abs() + v.z.abs())
    } else if n > 1.0 && n.is_finite() {
        let s = v.x.abs().powf(n)? + v.y.abs().powf(n)? + v.z.abs().powf(n)?;
        Ok(s.powf(1.0 / n)?)
    } else {
        Err(AtomError::NormOrder(n))
    }
}

/// Mean L-n distance between a trajectory and its target.
pub fn abs_position_error<S: Scalar>(traj: &[Vec3<S>], target: &[Vec3<S>], n: f64) -> Result<S, AtomError> {
    if traj.len() != target.len() {
        return Err(AtomError::LengthMismatch(traj.len(), target.len()));
    }
    let per: Vec<S> = traj.iter().zip(target).map(|(&a, &b)| lp_norm(a - b, n)).collect::<Result<_, _>>()?;
    mean(&per)
}

/// What a k-th difference is compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DynamicsTarget {
    /// Full vector (magnitude and orientation).
    Vector([f64; 3]),
    /// Magnitude only.
    Speed(f64),
}

/// Per-frame distance between the k-th difference and the target; `N − k`
/// entries.
pub fn dynamics_per_frame<S: Scalar>(
    traj: &[Vec3<S>],
    target: DynamicsTarget,
    k: usize,
    fps: f64,
) -> Result<Vec<S>, AtomError> {
    let d = difference_trajectory(traj, k, fps)?;
    Ok(d.into_iter()
        .map(|v| match target {
            DynamicsTarget::Vector(t) => v.add_f([-t[0], -t[1], -t[2]]).norm(),
            DynamicsTarget::Speed(s) => (v.norm() - s).abs(),
        })
        .collect())
}

pub fn dynamics_error<S: Scalar>(traj: &[Vec3<S>], target: DynamicsTarget, k: usize, fps: f64) -> Result<S, AtomError> {
    mean(&dynamics_per_frame(traj, target, k, fps)?)
}

/// Point, line, plane, half-space or sphere. Directions and normals are
/// stored unit length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeometricPrimitive {
    Point([f64; 3]),
    Line { origin: [f64; 3], dir: [f64; 3] },
    /// `{p : n·p = offset}`.
    Plane { normal: [f64; 3], offset: f64 },
    /// `{p : n·p ≤ offset}`.
    Halfspace { normal: [f64; 3], offset: f64 },
    Sphere { center: [f64; 3], radius: f64 },
}

fn unit(v: [f64; 3], what: &str) -> Result<([f64; 3], f64), AtomError> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 1e-12) || !n.is_finite() {
        return Err(AtomError::DegeneratePrimitive(format!("{what} has zero length")));
    }
    Ok(([v[0] / n, v[1] / n, v[2] / n], n))
}

impl GeometricPrimitive {
    /// Line through `origin` along `dir` (normalized).
    pub fn line(origin: [f64; 3], dir: [f64; 3]) -> Result<Self, AtomError> {
        Ok(Self::Line { origin, dir: unit(dir, "line direction")?.0 })
    }

    /// Plane `n·p = offset`; a non-unit normal rescales the offset with it.
    pub fn plane(normal: [f64; 3], offset: f64) -> Result<Self, AtomError> {
        let (normal, len) = unit(normal, "plane normal")?;
        Ok(Self::Plane { normal, offset: offset / len })
    }

    pub fn halfspace(normal: [f64; 3], offset: f64) -> Result<Self, AtomError> {
        let (normal, len) = unit(normal, "half-space normal")?;
        Ok(Self::Halfspace { normal, offset: offset / len })
    }

    pub fn sphere(center: [f64; 3], radius: f64) -> Result<Self, AtomError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(AtomError::DegeneratePrimitive(format!("sphere radius {radius}")));
        }
        Ok(Self::Sphere { center, radius })
    }

    pub fn validate(&self) -> Result<(), AtomError> {
        let is_unit = |v: &[f64; 3]| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() <= 1e-9;
        match self {
            Self::Line { dir, .. } if !is_unit(dir) => {
                Err(AtomError::DegeneratePrimitive("line direction is not unit length".into()))
            }
            Self::Plane { normal, .. } | Self::Halfspace { normal, .. } if !is_unit(normal) => {
                Err(AtomError::DegeneratePrimitive("normal is not unit length".into()))
            }
            Self::Sphere { radius, .. } if !(*radius > 0.0) => {
                Err(AtomError::DegeneratePrimitive(format!("sphere radius {radius}")))
            }
            _ => Ok(()),
        }
    }
}

/// Euclidean distance from `p` to the primitive. Half-spaces return the
/// signed value `n·p − offset`, positive outside.
pub fn geometric_distance<S: Scalar>(p: Vec3<S>, prim: &GeometricPrimitive) -> Result<S, AtomError> {
    prim.validate()?;
    Ok(match *prim {
        GeometricPrimitive::Point(q) => p.add_f(neg(q)).norm(),
        GeometricPrimitive::Line { origin, dir } => {
            let rel = p.add_f(neg(origin));
            let along = rel.dot_f(dir);
            (rel - Vec3::lift(along, dir).scale(along)).norm()
        }
        GeometricPrimitive::Plane { normal, offset } => (p.dot_f(normal) - offset).abs(),
        GeometricPrimitive::Halfspace { normal, offset } => p.dot_f(normal) - offset,
        GeometricPrimitive::Sphere { center, radius } => (p.add_f(neg(center)).norm() - radius).abs(),
    })
}

fn neg(v: [f64; 3]) -> [f64; 3] {
    [-v[0], -v[1], -v[2]]
}

/// `|A_t − B_t|` per frame.
pub fn relative_distance<S: Scalar>(a: &[Vec3<S>], b: &[Vec3<S>]) -> Result<Vec<S>, AtomError> {
    if a.len() != b.len() {
        return Err(AtomError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(&p, &q)| (p - q).norm()).collect())
}

/// `1 − cos` of the angle between `v` and the unit direction `d`.
pub fn direction_mismatch<S: Scalar>(v: Vec3<S>, d: [f64; 3]) -> Result<S, AtomError> {
    let len = v.norm();
    let cos = v.dot_f(d).div(len)?;
    Ok(cos.lift(1.0) - cos)
}

/// Mean `1 − cos` between the bone `child − parent` and `d`; in `[0, 2]`.
pub fn directional_error<S: Scalar>(child: &[Vec3<S>], parent: &[Vec3<S>], d: [f64; 3]) -> Result<S, AtomError> {
    if child.len() != parent.len() {
        return Err(AtomError::LengthMismatch(child.len(), parent.len()));
    }
    let (d, _) = unit(d, "direction")?;
    let per: Vec<S> =
        child.iter().zip(parent).map(|(&c, &p)| direction_mismatch(c - p, d)).collect::<Result<_, _>>()?;
    mean(&per)
}

/// Mass-weighted mean of bone midpoints for one frame. Bone `b` connects
/// joint `b + 1` to its parent.
pub fn center_of_mass<S: Scalar>(skeleton: &Skeleton, frame: &[Vec3<S>], masses: &[f64]) -> Result<Vec3<S>, AtomError> {
    let bones = skeleton.joint_count() - 1;
    if masses.len() != bones {
        return Err(AtomError::MassCount(masses.len(), bones));
    }
    if frame.len() != skeleton.joint_count() {
        return Err(AtomError::LengthMismatch(frame.len(), skeleton.joint_count()));
    }
    let mut terms = [Vec::new(), Vec::new(), Vec::new()];
    for (b, &m) in masses.iter().enumerate() {
        let j = b + 1;
        let p = skeleton.parent(j).expect("non-root joint has a parent");
        for (axis, t) in terms.iter_mut().enumerate() {
            t.push((frame[j].get(axis), 0.5 * m));
            t.push((frame[p].get(axis), 0.5 * m));
        }
    }
    let ctx = frame[0].x;
    Ok(Vec3::new(
        S::linear_combination(ctx, &terms[0], 0.0),
        S::linear_combination(ctx, &terms[1], 0.0),
        S::linear_combination(ctx, &terms[2], 0.0),
    ))
}

/// Foot disc radius in meters.
pub const SUPPORT_RADIUS: f64 = 0.10;

/// Ground-plane convex hull of discs around the stance feet: the hull of the
/// disc centers grown by the radius. Vertices are CCW in `(x, z)`.
#[derive(Clone, Debug)]
pub struct SupportRegion<S> {
    pub vertices: Vec<[S; 2]>,
    pub radius: f64,
}

impl<S: Scalar> SupportRegion<S> {
    pub fn from_discs(centers: &[[S; 2]], radius: f64) -> Result<Self, AtomError> {
        if centers.is_empty() {
            return Err(AtomError::EmptySupport);
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(AtomError::DegeneratePrimitive(format!("disc radius {radius}")));
        }
        let values: Vec<[f64; 2]> = centers.iter().map(|p| [p[0].value(), p[1].value()]).collect();
        let hull = convex_hull(&values);
        Ok(Self { vertices: hull.into_iter().map(|i| centers[i]).collect(), radius })
    }

    /// Ground projections of `feet` in one frame.
    pub fn from_feet(frame: &[Vec3<S>], feet: &[usize], radius: f64) -> Result<Self, AtomError> {
        let centers: Vec<[S; 2]> = feet.iter().map(|&f| frame[f].xz()).collect();
        Self::from_discs(&centers, radius)
    }

    /// Distance from `q` to the region; zero inside.
    pub fn distance(&self, q: [S; 2]) -> S {
        let core = self.core_distance(q);
        (core - self.radius).clamp_min(0.0)
    }

    /// Distance to the hull of the centers alone.
    fn core_distance(&self, q: [S; 2]) -> S {
        let v = &self.vertices;
        let n = v.len();
        if n == 1 {
            return S::norm3(q[0] - v[0][0], q[1] - v[0][1], q[0].zero_like());
        }
        if n == 2 {
            return segment_distance(q, v[0], v[1]);
        }
        let qv = [q[0].value(), q[1].value()];
        let inside = (0..n).all(|i| {
            let a = [v[i][0].value(), v[i][1].value()];
            let b = [v[(i + 1) % n][0].value(), v[(i + 1) % n][1].value()];
            cross(a, b, qv) >= 0.0
        });
        if inside {
            return q[0].zero_like();
        }
        (0..n)
            .map(|i| segment_distance(q, v[i], v[(i + 1) % n]))
            .reduce(|a, b| a.min(b))
            .expect("hull has vertices")
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segment_distance<S: Scalar>(q: [S; 2], a: [S; 2], b: [S; 2]) -> S {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = [q[0] - a[0], q[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let proj = aq[0] * ab[0] + aq[1] * ab[1];
    let t = if proj.value() <= 0.0 || len2.value() <= 0.0 {
        q[0].lift(0.0)
    } else if proj.value() >= len2.value() {
        q[0].lift(1.0)
    } else {
        proj.div(len2).expect("positive length")
    };
    let dx = aq[0] - ab[0] * t;
    let dz = aq[1] - ab[1] * t;
    S::norm3(dx, dz, q[0].zero_like())
}

/// Andrew's monotone chain; returns CCW hull indices without collinear
/// points.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].partial_cmp(&points[b]).expect("finite points"));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Distance from the ground projection of the center of mass to the support
/// region of `feet`, per frame.
pub fn com_error<S: Scalar>(
    skeleton: &Skeleton,
    pos: &[Vec<Vec3<S>>],
    feet: &[usize],
    radius: f64,
    masses: &[f64],
) -> Result<Vec<S>, AtomError> {
    pos.iter()
        .map(|frame| {
            let region = SupportRegion::from_feet(frame, feet, radius)?;
            let com = center_of_mass(skeleton, frame, masses)?;
            Ok(region.distance(com.xz()))
        })
        .collect()
}

/// `max(e − margin, 0)`: zero when `e < margin`.
pub fn lt<S: Scalar>(e: S, margin: S) -> S {
    (e - margin).max(e.zero_like())
}

/// `max(margin − e, 0)`: zero when `e > margin`.
pub fn gt<S: Scalar>(e: S, margin: S) -> S {
    (margin - e).max(e.zero_like())
}

pub fn and_<S: Scalar>(a: S, b: S) -> S {
    a + b
}

pub fn or_<S: Scalar>(a: S, b: S) -> S {
    a.min(b)
}

/// Raw negation; unbounded below. Prefer [`far`].
pub fn not_<S: Scalar>(e: S) -> S {
    -e
}

/// `max(bound − e, 0)`: pushes `e` up to at least `bound`.
pub fn far<S: Scalar>(e: S, bound: f64) -> S {
    (e.lift(bound) - e).max(e.zero_like())
}

/// Frame reference resolved once the sequence length is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameRef {
    Index(i64),
    First,
    Mid,
    Last,
}

impl FrameRef {
    pub fn resolve(self, frames: usize) -> Result<usize, AtomError> {
        if frames == 0 {
            return Err(AtomError::EmptySelection);
        }
        let t = match self {
            Self::Index(i) => {
                if i < 0 || i as usize >= frames {
                    return Err(AtomError::FrameOutOfRange { index: i, frames });
                }
                i as usize
            }
            Self::First => 0,
            Self::Mid => (frames - 1) / 2,
            Self::Last => frames - 1,
        };
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameSelector {
    All,
    At(FrameRef),
    /// Inclusive on both ends.
    Range(FrameRef, FrameRef),
    Set(Vec<FrameRef>),
}

impl FrameSelector {
    /// Sorted, duplicate-free frame indices.
    pub fn resolve(&self, frames: usize) -> Result<Vec<usize>, AtomError> {
        let mut out = match self {
            Self::All => {
                if frames == 0 {
                    return Err(AtomError::EmptySelection);
                }
                (0..frames).collect()
            }
            Self::At(r) => vec![r.resolve(frames)?],
            Self::Range(a, b) => {
                let (a, b) = (a.resolve(frames)?, b.resolve(frames)?);
                if a > b {
                    return Err(AtomError::EmptySelection);
                }
                (a..=b).collect()
            }
            Self::Set(refs) => refs.iter().map(|r| r.resolve(frames)).collect::<Result<Vec<_>, _>>()?,
        };
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(AtomError::EmptySelection);
        }
        Ok(out)
    }
}

/// Mean of a per-frame term over the selected frames.
pub fn keyframe<S: Scalar, E: From<AtomError>>(
    selector: &FrameSelector,
    frames: usize,
    mut term: impl FnMut(usize) -> Result<S, E>,
) -> Result<S, E> {
    let idx = selector.resolve(frames)?;
    let vals: Vec<S> = idx.into_iter().map(&mut term).collect::<Result<_, _>>()?;
    Ok(mean(&vals)?)
}
