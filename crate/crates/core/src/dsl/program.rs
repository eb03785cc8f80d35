use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, ParamType};
use super::{CheckedProgram, Span};
use crate::atoms::{self, AtomError, FrameSelector, GeometricPrimitive, SupportRegion, SUPPORT_RADIUS};
use crate::autodiff::{Differentiable, Scalar, Vec3};
use crate::kinematics::{forward_kinematics_flat, MotionSequence, Skeleton};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Float(f64),
    Vec3([f64; 3]),
}

/// Parameter overrides by name.
pub type Params = BTreeMap<String, ParamValue>;

#[derive(Clone, Debug)]
pub struct ParamDef {
    pub name: String,
    pub ty: ParamType,
    pub default: Option<ParamValue>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimKind {
    Plane,
    Line,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Dist,
    /// Distance from a point to a primitive.
    DistTo,
    Midpoint,
    Dot,
    Norm,
    Abs,
    Min,
    Max,
    Com,
    /// `1 − cos` of the angle between two vectors.
    AngleTo,
}

/// Lowered expression. Types were settled by the checker.
#[derive(Clone, Debug)]
pub enum Node {
    Const(f64),
    Param(usize),
    Vector(Box<[Node; 3]>),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    /// Position (`order` 0), velocity (1) or acceleration (2) of a joint.
    Joint { joint: usize, order: u8 },
    Component(Box<Node>, usize),
    Call(Func, Vec<Node>),
    Prim(PrimKind, Vec<Node>),
    /// Center-of-mass distance to the support of these joints.
    Balance(Vec<usize>),
}

#[derive(Clone, Debug)]
pub enum PredIr {
    Eq { a: Node, b: Node, vector: bool, norm: f64 },
    Lt(Node, Node),
    Gt(Node, Node),
    Far(Node, Node),
    And(Box<PredIr>, Box<PredIr>),
    Or(Box<PredIr>, Box<PredIr>),
    When(Box<PredIr>, Box<PredIr>),
}

#[derive(Clone, Debug)]
pub struct Term {
    pub selector: FrameSelector,
    pub pred: PredIr,
    pub weight: Node,
    pub span: Span,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct EvalError {
    pub message: String,
    /// Index of the failing term, when one is to blame.
    pub term: Option<usize>,
    pub span: Option<Span>,
}

impl EvalError {
    fn new(message: impl Into<String>) -> Self {
        Self { message: message.into(), term: None, span: None }
    }

    fn at(mut self, term: usize, span: Span) -> Self {
        self.term.get_or_insert(term);
        self.span.get_or_insert(span);
        self
    }
}

impl From<AtomError> for EvalError {
    fn from(e: AtomError) -> Self {
        EvalError::new(e.to_string())
    }
}

impl From<crate::autodiff::AdError> for EvalError {
    fn from(e: crate::autodiff::AdError) -> Self {
        EvalError::new(e.to_string())
    }
}

impl From<crate::kinematics::KinematicsError> for EvalError {
    fn from(e: crate::kinematics::KinematicsError) -> Self {
        EvalError::new(e.to_string())
    }
}

/// Total error and each term's weighted contribution; `total` is their sum.
#[derive(Clone, Debug)]
pub struct Evaluation<S> {
    pub total: S,
    pub per_term: Vec<S>,
}

/// A compiled, immutable error function `F(motion, p)`.
#[derive(Clone, Debug)]
pub struct ErrorProgram {
    pub name: String,
    params: Vec<ParamDef>,
    terms: Vec<Term>,
    skeleton: Skeleton,
}

pub fn compile(checked: CheckedProgram) -> ErrorProgram {
    ErrorProgram { name: checked.name, params: checked.params, terms: checked.terms, skeleton: checked.skeleton }
}

#[derive(Clone, Copy, Debug)]
enum Value<S> {
    S(S),
    V(Vec3<S>),
}

impl<S: Scalar> Value<S> {
    fn s(self) -> S {
        match self {
            Value::S(s) => s,
            Value::V(_) => unreachable!("checked as scalar"),
        }
    }

    fn v(self) -> Vec3<S> {
        match self {
            Value::V(v) => v,
            Value::S(_) => unreachable!("checked as vector"),
        }
    }
}

struct Ctx<'a, S> {
    skeleton: &'a Skeleton,
    pos: &'a [Vec<Vec3<S>>],
    fps: f64,
    params: &'a [ParamValue],
    /// Any value on the evaluation tape, for lifting constants.
    seed: S,
}

impl Node {
    /// Evaluates a motion-independent node. `None` entries are parameters
    /// without a value yet.
    pub(crate) fn eval_const(&self, params: &[Option<ParamValue>]) -> Result<ParamValue, EvalError> {
        let resolved: Vec<ParamValue> = params
            .iter()
            .map(|p| p.ok_or_else(|| EvalError::new("parameter has no value")))
            .collect::<Result<_, _>>()?;
        let skeleton = crate::kinematics::default_skeleton();
        let ctx = Ctx { skeleton: &skeleton, pos: &[], fps: 1.0, params: &resolved, seed: 0.0 };
        Ok(match eval(self, &ctx, 0)? {
            Value::S(s) => ParamValue::Float(s),
            Value::V(v) => ParamValue::Vec3(v.value()),
        })
    }

    /// Validates a primitive against default parameters where possible.
    pub(crate) fn check_prim(&self, params: &[Option<ParamValue>]) -> Result<(), String> {
        let Node::Prim(kind, args) = self else { return Ok(()) };
        let resolved: Option<Vec<ParamValue>> = params.iter().copied().collect();
        let Some(resolved) = resolved else { return Ok(()) };
        let skeleton = crate::kinematics::default_skeleton();
        let ctx = Ctx { skeleton: &skeleton, pos: &[], fps: 1.0, params: &resolved, seed: 0.0 };
        build_prim(*kind, args, &ctx).map(|_| ()).map_err(|e| e.message)
    }
}

fn build_prim<S: Scalar>(kind: PrimKind, args: &[Node], ctx: &Ctx<'_, S>) -> Result<GeometricPrimitive, EvalError> {
    let vals: Vec<Value<S>> = args.iter().map(|a| eval(a, ctx, 0)).collect::<Result<_, _>>()?;
    let v = |i: usize| vals[i].v().value();
    let s = |i: usize| vals[i].s().value();
    Ok(match kind {
        PrimKind::Plane => GeometricPrimitive::plane(v(0), s(1))?,
        PrimKind::Line => GeometricPrimitive::line(v(0), v(1))?,
        PrimKind::Sphere => GeometricPrimitive::sphere(v(0), s(1))?,
    })
}

fn eval<S: Scalar>(node: &Node, ctx: &Ctx<'_, S>, t: usize) -> Result<Value<S>, EvalError> {
    let lift = |c: f64| ctx.seed.lift(c);
    Ok(match node {
        Node::Const(c) => Value::S(lift(*c)),
        Node::Param(i) => match ctx.params[*i] {
            ParamValue::Float(v) => Value::S(lift(v)),
            ParamValue::Vec3(v) => Value::V(Vec3::lift(ctx.seed, v)),
        },
        Node::Vector(parts) => {
            let [x, y, z] = &**parts;
            Value::V(Vec3::new(eval(x, ctx, t)?.s(), eval(y, ctx, t)?.s(), eval(z, ctx, t)?.s()))
        }
        Node::Neg(inner) => match eval(inner, ctx, t)? {
            Value::S(s) => Value::S(-s),
            Value::V(v) => Value::V(-v),
        },
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, ctx, t)?, eval(b, ctx, t)?);
            match (op, a, b) {
                (BinOp::Add, Value::S(x), Value::S(y)) => Value::S(x + y),
                (BinOp::Sub, Value::S(x), Value::S(y)) => Value::S(x - y),
                (BinOp::Mul, Value::S(x), Value::S(y)) => Value::S(x * y),
                (BinOp::Div, Value::S(x), Value::S(y)) => Value::S(x.div(y)?),
                (BinOp::Add, Value::V(x), Value::V(y)) => Value::V(x + y),
                (BinOp::Sub, Value::V(x), Value::V(y)) => Value::V(x - y),
                (BinOp::Mul, Value::S(x), Value::V(y)) | (BinOp::Mul, Value::V(y), Value::S(x)) => Value::V(y.scale(x)),
                (BinOp::Div, Value::V(x), Value::S(y)) => Value::V(x.div(y)?),
                _ => unreachable!("operand types checked"),
            }
        }
        Node::Joint { joint, order } => Value::V(joint_value(ctx, *joint, *order, t)?),
        Node::Component(inner, axis) => Value::S(eval(inner, ctx, t)?.v().get(*axis)),
        Node::Call(f, args) => {
            let arg = |i: usize| eval(&args[i], ctx, t);
            match f {
                Func::Dist => Value::S((arg(0)?.v() - arg(1)?.v()).norm()),
                Func::DistTo => {
                    let Node::Prim(kind, pargs) = &args[1] else { unreachable!("checked primitive") };
                    let prim = build_prim(*kind, pargs, ctx)?;
                    Value::S(atoms::geometric_distance(arg(0)?.v(), &prim)?)
                }
                Func::Midpoint => Value::V((arg(0)?.v() + arg(1)?.v()).scale_f(0.5)),
                Func::Dot => Value::S(arg(0)?.v().dot(arg(1)?.v())),
                Func::Norm => Value::S(arg(0)?.v().norm()),
                Func::Abs => Value::S(arg(0)?.s().abs()),
                Func::Min => Value::S(arg(0)?.s().min(arg(1)?.s())),
                Func::Max => Value::S(arg(0)?.s().max(arg(1)?.s())),
                Func::Com => Value::V(atoms::center_of_mass(ctx.skeleton, frame(ctx, t)?, &ctx.skeleton.mass_fraction)?),
                Func::AngleTo => {
                    let (a, b) = (arg(0)?.v(), arg(1)?.v());
                    let cos = a.dot(b).div(a.norm() * b.norm())?;
                    Value::S(lift(1.0) - cos)
                }
            }
        }
        Node::Prim(..) => unreachable!("primitives only appear as distance arguments"),
        Node::Balance(joints) => {
            let f = frame(ctx, t)?;
            let region = SupportRegion::from_feet(f, joints, SUPPORT_RADIUS)?;
            let com = atoms::center_of_mass(ctx.skeleton, f, &ctx.skeleton.mass_fraction)?;
            Value::S(region.distance(com.xz()))
        }
    })
}

fn frame<'a, S>(ctx: &Ctx<'a, S>, t: usize) -> Result<&'a [Vec3<S>], EvalError> {
    ctx.pos.get(t).map(Vec::as_slice).ok_or_else(|| EvalError::new("expression needs a motion"))
}

/// Joint position or forward difference at frame `t`. Differences near the
/// end reuse the last available one.
fn joint_value<S: Scalar>(ctx: &Ctx<'_, S>, j: usize, order: u8, t: usize) -> Result<Vec3<S>, EvalError> {
    let n = ctx.pos.len();
    let p = |i: usize| ctx.pos[i][j];
    match order {
        0 => Ok(frame(ctx, t)?[j]),
        1 => {
            if n < 2 {
                return Err(EvalError::new(format!(".vel needs at least 2 frames, have {n}")));
            }
            let i = t.min(n - 2);
            Ok((p(i + 1) - p(i)).scale_f(ctx.fps))
        }
        _ => {
            if n < 3 {
                return Err(EvalError::new(format!(".acc needs at least 3 frames, have {n}")));
            }
            let i = t.min(n - 3);
            Ok((p(i + 2) - p(i + 1).scale_f(2.0) + p(i)).scale_f(ctx.fps * ctx.fps))
        }
    }
}

fn eval_pred<S: Scalar>(p: &PredIr, ctx: &Ctx<'_, S>, t: usize) -> Result<S, EvalError> {
    Ok(match p {
        PredIr::Eq { a, b, vector, norm } => {
            if *vector {
                atoms::lp_norm(eval(a, ctx, t)?.v() - eval(b, ctx, t)?.v(), *norm)?
            } else {
                (eval(a, ctx, t)?.s() - eval(b, ctx, t)?.s()).abs()
            }
        }
        PredIr::Lt(a, b) => atoms::lt(eval(a, ctx, t)?.s(), eval(b, ctx, t)?.s()),
        PredIr::Gt(a, b) => atoms::gt(eval(a, ctx, t)?.s(), eval(b, ctx, t)?.s()),
        PredIr::Far(e, bound) => atoms::far(eval(e, ctx, t)?.s(), eval(bound, ctx, t)?.s().value()),
        PredIr::And(a, b) => atoms::and_(eval_pred(a, ctx, t)?, eval_pred(b, ctx, t)?),
        PredIr::Or(a, b) => atoms::or_(eval_pred(a, ctx, t)?, eval_pred(b, ctx, t)?),
        PredIr::When(guard, body) => {
            if eval_pred(guard, ctx, t)?.value() <= 0.0 {
                eval_pred(body, ctx, t)?
            } else {
                ctx.seed.zero_like()
            }
        }
    })
}

impl ErrorProgram {
    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Human-readable description of each term.
    pub fn term_labels(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.label.clone()).collect()
    }

    pub fn term_spans(&self) -> Vec<Span> {
        self.terms.iter().map(|t| t.span).collect()
    }

    /// Declared parameter names, types and defaults.
    pub fn param_defs(&self) -> impl Iterator<Item = (&str, ParamType, Option<ParamValue>)> {
        self.params.iter().map(|p| (p.name.as_str(), p.ty, p.default))
    }

    /// Defaults merged with overrides, in declaration order.
    pub fn resolve_params(&self, overrides: &Params) -> Result<Vec<ParamValue>, EvalError> {
        for name in overrides.keys() {
            if !self.params.iter().any(|p| &p.name == name) {
                return Err(EvalError::new(format!("unknown parameter '{name}'")));
            }
        }
        self.params
            .iter()
            .map(|p| {
                let v = overrides
                    .get(&p.name)
                    .copied()
                    .or(p.default)
                    .ok_or_else(|| EvalError { span: Some(p.span), ..EvalError::new(format!("missing parameter '{}'", p.name)) })?;
                match (p.ty, v) {
                    (ParamType::Float, ParamValue::Float(_)) | (ParamType::Vec3, ParamValue::Vec3(_)) => Ok(v),
                    _ => Err(EvalError::new(format!("parameter '{}' has the wrong type", p.name))),
                }
            })
            .collect()
    }

    /// Term weights under the given parameters.
    pub fn weights(&self, params: &[ParamValue]) -> Result<Vec<f64>, EvalError> {
        let opt: Vec<Option<ParamValue>> = params.iter().copied().map(Some).collect();
        self.terms
            .iter()
            .enumerate()
            .map(|(i, term)| match term.weight.eval_const(&opt).map_err(|e| e.at(i, term.span))? {
                ParamValue::Float(w) if w >= 0.0 && w.is_finite() => Ok(w),
                ParamValue::Float(w) => Err(EvalError::new(format!("weight {w} is negative")).at(i, term.span)),
                ParamValue::Vec3(_) => unreachable!("weights are scalar"),
            })
            .collect()
    }

    /// Evaluates on joint positions `[frame][joint]`.
    pub fn evaluate<S: Scalar>(
        &self,
        pos: &[Vec<Vec3<S>>],
        fps: f64,
        params: &[ParamValue],
    ) -> Result<Evaluation<S>, EvalError> {
        let seed = pos
            .first()
            .and_then(|f| f.first())
            .map(|p| p.x)
            .ok_or_else(|| EvalError::new("empty motion"))?;
        if params.len() != self.params.len() {
            return Err(EvalError::new(format!("expected {} parameters, got {}", self.params.len(), params.len())));
        }
        let weights = self.weights(params)?;
        let ctx = Ctx { skeleton: &self.skeleton, pos, fps, params, seed };
        let n = pos.len();
        let mut per_term = Vec::with_capacity(self.terms.len());
        for (i, (term, &w)) in self.terms.iter().zip(&weights).enumerate() {
            if w == 0.0 {
                per_term.push(seed.zero_like());
                continue;
            }
            let v: S = atoms::keyframe(&term.selector, n, |t| eval_pred(&term.pred, &ctx, t))
                .map_err(|e: EvalError| e.at(i, term.span))?;
            per_term.push(v * w);
        }
        let parts: Vec<(S, f64)> = per_term.iter().map(|&v| (v, 1.0)).collect();
        let total = S::linear_combination(seed, &parts, 0.0);
        Ok(Evaluation { total, per_term })
    }

    /// Evaluates on a flat `N × (3 + 3J)` motion parameter vector.
    pub fn evaluate_flat<S: Scalar>(
        &self,
        flat: &[S],
        frames: usize,
        fps: f64,
        params: &[ParamValue],
    ) -> Result<Evaluation<S>, EvalError> {
        let pos = forward_kinematics_flat(&self.skeleton, flat, frames)?;
        self.evaluate(&pos, fps, params)
    }

    pub fn evaluate_motion(&self, motion: &MotionSequence, params: &Params) -> Result<Evaluation<f64>, EvalError> {
        let p = self.resolve_params(params)?;
        self.evaluate_flat(&motion.flatten(), motion.frame_count(), motion.fps, &p)
    }
}

/// `F(·, p)` as a function of the flat motion vector, for gradient checks.
pub struct FlatObjective<'a> {
    pub program: &'a ErrorProgram,
    pub params: Vec<ParamValue>,
    pub frames: usize,
    pub fps: f64,
}

impl Differentiable for FlatObjective<'_> {
    type Error = EvalError;

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, EvalError> {
        Ok(self.program.evaluate_flat(x, self.frames, self.fps, &self.params)?.total)
    }
}

#[cfg(test)]
mod tests {
    use super::super::compile_source;
    use super::*;
    use crate::autodiff::{check_gradient, Differentiable};
    use crate::kinematics::{default_skeleton, forward_kinematics};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn program(src: &str) -> ErrorProgram {
        compile_source(src, &default_skeleton()).unwrap_or_else(|d| panic!("{d}"))
    }

    fn random_motion(seed: u64, n: usize) -> MotionSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MotionSequence::rest(n, 22, 20.0);
        for f in &mut m.frames {
            f.root_pos = [rng.random_range(-1.0..1.0), rng.random_range(0.7..1.0), rng.random_range(-1.0..1.0)];
            for r in &mut f.joint_rot {
                *r = [0, 1, 2].map(|_| rng.random_range(-0.6..0.6));
            }
        }
        m
    }

    #[test]
    fn satisfied_program_is_zero() {
        let p = program("task \"t\" { constraint all frames: joint(pelvis).pos.y == 0 and joint(head).pos.y > 0.5; }");
        let m = MotionSequence::rest(5, 22, 20.0);
        let e = p.evaluate_motion(&m, &Params::new()).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn weight_scales_contribution() {
        let m = random_motion(1, 6);
        let a = program("task \"t\" { constraint all frames: joint(head).pos.y == 2; constraint frame 0: joint(left_hand).pos.x > 3; }");
        let b = program("task \"t\" { constraint all frames: joint(head).pos.y == 2 weight 2; constraint frame 0: joint(left_hand).pos.x > 3; }");
        let ea = a.evaluate_motion(&m, &Params::new()).unwrap();
        let eb = b.evaluate_motion(&m, &Params::new()).unwrap();
        assert!((eb.per_term[0] - 2.0 * ea.per_term[0]).abs() < 1e-12);
        assert_eq!(ea.per_term[1], eb.per_term[1]);
        assert!((ea.total - ea.per_term.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn keyframe_mean_matches_manual() {
        let m = random_motion(2, 9);
        let pos = forward_kinematics(&default_skeleton(), &m).unwrap();
        let p = program(
            "task \"t\" { param h: vec3 = [1.2, 0.3, 0.7];
              constraint frames [first, mid, last]: joint(head).pos.y == h.x; }",
        );
        let got = p.evaluate_motion(&m, &Params::new()).unwrap().total;
        let expect = [0, 4, 8].iter().map(|&t| (pos.pos[t][15][1] - 1.2).abs()).sum::<f64>() / 3.0;
        assert!((got - expect).abs() < 1e-12);
        let mut over = Params::new();
        over.insert("h".into(), ParamValue::Vec3([0.0; 3]));
        let got0 = p.evaluate_motion(&m, &over).unwrap().total;
        let expect0 = [0, 4, 8].iter().map(|&t| pos.pos[t][15][1].abs()).sum::<f64>() / 3.0;
        assert!((got0 - expect0).abs() < 1e-12);
    }

    #[test]
    fn set_equals_range() {
        let m = random_motion(3, 10);
        let a = program("task \"t\" { constraint frames [2, 3, 4, 5]: joint(left_hand).vel == [0.5, 0, 0]; }");
        let b = program("task \"t\" { constraint frames 2..5: joint(left_hand).vel == [0.5, 0, 0]; }");
        assert_eq!(
            a.evaluate_motion(&m, &Params::new()).unwrap().total,
            b.evaluate_motion(&m, &Params::new()).unwrap().total
        );
    }

    #[test]
    fn or_takes_min_and_when_masks() {
        let m = MotionSequence::rest(3, 22, 20.0);
        // head at 0.59; first clause holds so the whole 'or' is zero
        let p = program("task \"t\" { constraint all frames: joint(head).pos.y < 1 or joint(head).pos.y > 5; }");
        assert_eq!(p.evaluate_motion(&m, &Params::new()).unwrap().total, 0.0);
        let p = program("task \"t\" { constraint all frames: when (joint(head).pos.y > 1) joint(head).pos.y < 0.1; }");
        assert_eq!(p.evaluate_motion(&m, &Params::new()).unwrap().total, 0.0);
        let p = program("task \"t\" { constraint all frames: when (joint(head).pos.y < 1) joint(head).pos.y < 0.1; }");
        assert!((p.evaluate_motion(&m, &Params::new()).unwrap().total - 0.49).abs() < 1e-12);
    }

    #[test]
    fn parameters_resolve() {
        let p = program("task \"t\" { param a: float; param b: float = 2; constraint all frames: 1 < a weight b; }");
        let m = MotionSequence::rest(2, 22, 20.0);
        assert!(p.evaluate_motion(&m, &Params::new()).unwrap_err().message.contains("missing parameter 'a'"));
        let mut over = Params::new();
        over.insert("a".into(), ParamValue::Float(0.5));
        assert!((p.evaluate_motion(&m, &over).unwrap().total - 1.0).abs() < 1e-15);
        over.insert("zz".into(), ParamValue::Float(0.5));
        assert!(p.evaluate_motion(&m, &over).is_err());
        let mut neg = Params::new();
        neg.insert("a".into(), ParamValue::Float(0.5));
        neg.insert("b".into(), ParamValue::Float(-1.0));
        let e = p.evaluate_motion(&m, &neg).unwrap_err();
        assert_eq!(e.term, Some(0));
    }

    #[test]
    fn evaluation_errors_blame_the_term() {
        let p = program("task \"t\" { constraint all frames: 1 < 2; constraint all frames: 1 / (joint(pelvis).pos.x) < 1; }");
        let e = p.evaluate_motion(&MotionSequence::rest(2, 22, 20.0), &Params::new()).unwrap_err();
        assert_eq!(e.term, Some(1));
        assert!(e.span.is_some());
        let p = program("task \"t\" { constraint all frames: joint(head).acc == [0, 0, 0]; }");
        assert!(p.evaluate_motion(&MotionSequence::rest(2, 22, 20.0), &Params::new()).is_err());
    }

    struct Prog<'a>(&'a ErrorProgram, usize);
    impl Differentiable for Prog<'_> {
        type Error = EvalError;
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, EvalError> {
            Ok(self.0.evaluate_flat(x, self.1, 20.0, &self.0.resolve_params(&Params::new())?)?.total)
        }
    }

    #[test]
    fn every_function_is_differentiable() {
        let p = program(
            "task \"t\" {
               param n: vec3 = [1, 0, 2];
               let lh = joint(left_hand).pos;
               constraint all frames: dist(lh, joint(head).pos) == 0.3;
               constraint all frames: distToPlane(lh, plane(n, 1)) + distToLine(lh, line([0, 1, 0], [1, 0, 0])) == 0;
               constraint all frames: distToSphere(midpoint(lh, joint(right_hand).pos), sphere([0, 1, 0], 0.2)) < 0.1;
               constraint frames 1..3: dot(joint(head).vel, [1, 0, 0]) > 2 and norm(joint(pelvis).acc) < 1;
               constraint all frames: min(abs(com().x), max(lh.y, 0.3)) < 0.01;
               constraint all frames: angleTo(lh - joint(left_elbow).pos, [0, 1, 0]) == 0 norm 3;
               constraint all frames: balance(joint(left_ankle), joint(left_foot)) == 0 or far(lh.z, 1.5);
               constraint all frames: lh / 2 - -lh * 0.5 == [0.1, 0.2, 0.3] norm 1;
             }",
        );
        for seed in 0..3 {
            let m = random_motion(10 + seed, 5);
            let err = check_gradient(&Prog(&p, 5), &m.flatten(), 1e-6).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }
}
