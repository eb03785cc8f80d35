use std::collections::HashMap;

use super::ast::{self, BinOp, Cmp, Expr, Field, ForDomain, FrameRefAst, Item, ParamType, Pred, Selector, Spanned};
use super::program::{Func, Node, ParamDef, ParamValue, PredIr, PrimKind, Term};
use super::{printer, Diagnostic, Diagnostics, Span};
use crate::atoms::{FrameRef, FrameSelector};
use crate::kinematics::Skeleton;

/// A program whose names, joints and types are resolved and whose loops
/// are unrolled.
#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub name: String,
    pub(crate) params: Vec<ParamDef>,
    pub(crate) terms: Vec<Term>,
    pub(crate) skeleton: Skeleton,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Ty {
    Scalar,
    Vector,
    Joint,
    Prim(PrimKind),
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Scalar => "scalar",
            Ty::Vector => "vector",
            Ty::Joint => "joint",
            Ty::Prim(PrimKind::Plane) => "plane",
            Ty::Prim(PrimKind::Line) => "line",
            Ty::Prim(PrimKind::Sphere) => "sphere",
        }
    }
}

/// A checked expression. Joint handles carry their index in `joint`.
#[derive(Clone, Debug)]
struct Typed {
    node: Node,
    ty: Ty,
    /// Independent of the motion.
    constant: bool,
    joint: Option<usize>,
}

impl Typed {
    fn value(node: Node, ty: Ty, constant: bool) -> Self {
        Self { node, ty, constant, joint: None }
    }
}

#[derive(Clone, Debug)]
enum Binding {
    Param(usize, ParamType),
    Let(Typed),
    LoopJoint(usize),
    LoopInt(i64),
}

struct Checker<'a> {
    src: &'a str,
    skeleton: &'a Skeleton,
    diags: Vec<Diagnostic>,
    params: Vec<ParamDef>,
    /// Every top-level parameter with its declaration offset.
    declared: HashMap<String, usize>,
    terms: Vec<Term>,
}

type Scope = HashMap<String, Binding>;

/// Resolves and type-checks a parsed program against a skeleton.
pub fn typecheck(program: &ast::Program, src: &str, skeleton: &Skeleton) -> Result<CheckedProgram, Diagnostics> {
    let mut c = Checker {
        src,
        skeleton,
        diags: Vec::new(),
        params: Vec::new(),
        declared: HashMap::new(),
        terms: Vec::new(),
    };
    for item in &program.items {
        if let Item::Param(p) = item {
            c.declared.entry(p.name.node.clone()).or_insert(p.name.span.start);
        }
    }
    let mut scope = Scope::new();
    c.items(&program.items, &mut scope, &[]);
    if c.diags.is_empty() {
        Ok(CheckedProgram { name: program.name.clone(), params: c.params, terms: c.terms, skeleton: skeleton.clone() })
    } else {
        Err(Diagnostics(c.diags))
    }
}

const FUNCTIONS: &[&str] = &[
    "dist",
    "distToPlane",
    "distToLine",
    "distToSphere",
    "plane",
    "line",
    "sphere",
    "midpoint",
    "dot",
    "norm",
    "abs",
    "min",
    "max",
    "com",
    "angleTo",
    "balance",
];

impl<'a> Checker<'a> {
    fn err(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(self.src, span, msg));
    }

    fn items(&mut self, items: &[Item], scope: &mut Scope, iteration: &[(String, String)]) {
        for item in items {
            match item {
                Item::Param(p) => self.param(p, scope),
                Item::Let(l) => {
                    if self.is_reserved_name(&l.name.node) {
                        self.err(l.name.span, format!("'{}' is a function name and cannot be rebound", l.name.node));
                        continue;
                    }
                    if let Some(t) = self.expr(&l.value, scope) {
                        if matches!(scope.get(&l.name.node), Some(Binding::Let(_)) | Some(Binding::Param(..))) {
                            self.err(l.name.span, format!("'{}' is already defined", l.name.node));
                        } else {
                            scope.insert(l.name.node.clone(), Binding::Let(t));
                        }
                    }
                }
                Item::Constraint(c) => self.constraint(c, scope, iteration),
                Item::For(f) => self.for_loop(f, scope, iteration),
            }
        }
    }

    fn is_reserved_name(&self, name: &str) -> bool {
        FUNCTIONS.contains(&name) || name == "joint" || name == "joints"
    }

    fn param(&mut self, p: &ast::ParamDecl, scope: &mut Scope) {
        let name = &p.name.node;
        if self.is_reserved_name(name) {
            self.err(p.name.span, format!("'{name}' is a function name and cannot be a parameter"));
            return;
        }
        if self.params.iter().any(|q| &q.name == name) {
            self.err(p.name.span, format!("parameter '{name}' is declared twice"));
            return;
        }
        let default = match &p.default {
            None => None,
            Some(d) => match (p.ty, literal_value(&d.node)) {
                (ParamType::Float, Some(ParamValue::Float(v))) => Some(ParamValue::Float(v)),
                (ParamType::Vec3, Some(ParamValue::Vec3(v))) => Some(ParamValue::Vec3(v)),
                (ty, _) => {
                    let want = if ty == ParamType::Float { "a number" } else { "a 3-element vector" };
                    self.err(d.span, format!("default for '{name}' must be {want}"));
                    return;
                }
            },
        };
        let idx = self.params.len();
        self.params.push(ParamDef { name: name.clone(), ty: p.ty, default, span: p.name.span });
        scope.insert(name.clone(), Binding::Param(idx, p.ty));
    }

    fn for_loop(&mut self, f: &ast::ForLoop, scope: &Scope, iteration: &[(String, String)]) {
        let var = &f.var.node;
        if self.is_reserved_name(var) {
            self.err(f.var.span, format!("'{var}' cannot be a loop variable"));
            return;
        }
        let values: Vec<(Binding, String)> = match &f.domain.node {
            ForDomain::Joints => {
                (0..self.skeleton.joint_count()).map(|j| (Binding::LoopJoint(j), self.skeleton.joints[j].name.clone())).collect()
            }
            ForDomain::List(names) => {
                let mut out = Vec::new();
                for n in names {
                    match self.joint_name(n, scope) {
                        Some(j) => out.push((Binding::LoopJoint(j), self.skeleton.joints[j].name.clone())),
                        None => return,
                    }
                }
                out
            }
            ForDomain::Range(a, b) => (*a..=*b).map(|i| (Binding::LoopInt(i), i.to_string())).collect(),
        };
        let before = self.diags.len();
        for (binding, label) in values {
            let mut inner = scope.clone();
            inner.insert(var.clone(), binding);
            let mut it = iteration.to_vec();
            it.push((var.clone(), label));
            self.items(&f.body, &mut inner, &it);
            if self.diags.len() > before {
                // one report per loop body is enough
                return;
            }
        }
    }

    fn joint_name(&mut self, n: &Spanned<String>, scope: &Scope) -> Option<usize> {
        match scope.get(&n.node) {
            Some(Binding::LoopJoint(j)) => return Some(*j),
            Some(Binding::LoopInt(_)) => {
                self.err(n.span, format!("loop variable '{}' ranges over integers, not joints", n.node));
                return None;
            }
            _ => {}
        }
        match self.skeleton.joint_index(&n.node) {
            Some(j) => Some(j),
            None => {
                self.err(n.span, format!("unknown joint '{}'", n.node));
                None
            }
        }
    }

    fn constraint(&mut self, c: &ast::ConstraintDecl, scope: &Scope, iteration: &[(String, String)]) {
        let selector = self.selector(&c.selector, scope);
        let pred = self.pred(&c.pred, scope);
        let weight = match &c.weight {
            None => Some(Node::Const(1.0)),
            Some(w) => match self.expr(w, scope) {
                Some(t) if t.ty != Ty::Scalar => {
                    self.err(w.span, format!("weight must be a scalar, found {}", t.ty.name()));
                    None
                }
                Some(t) if !t.constant => {
                    self.err(w.span, "weight must not depend on the motion");
                    None
                }
                Some(t) => {
                    if let Ok(ParamValue::Float(v)) = t.node.eval_const(&self.default_params()) {
                        if !(v >= 0.0) || !v.is_finite() {
                            self.err(w.span, format!("weight must be nonnegative and finite, found {v}"));
                            return;
                        }
                    }
                    Some(t.node)
                }
                None => None,
            },
        };
        let (Some(selector), Some(pred), Some(weight)) = (selector, pred, weight) else { return };
        let mut label = format!("{}: {}", printer::selector(&c.selector.node), printer::pred(&c.pred.node));
        if !iteration.is_empty() {
            let it: Vec<String> = iteration.iter().map(|(k, v)| format!("{k}={v}")).collect();
            label.push_str(&format!(" [{}]", it.join(", ")));
        }
        self.terms.push(Term { selector, pred, weight, span: c.pred.span, label });
    }

    /// Parameter values where defaults exist; used for early checks only.
    fn default_params(&self) -> Vec<Option<ParamValue>> {
        self.params.iter().map(|p| p.default).collect()
    }

    fn selector(&mut self, s: &Spanned<Selector>, scope: &Scope) -> Option<FrameSelector> {
        Some(match &s.node {
            Selector::All => FrameSelector::All,
            Selector::At(r) => FrameSelector::At(self.fref(r, scope)?),
            Selector::Range(a, b) => {
                let (a, b) = (self.fref(a, scope), self.fref(b, scope));
                FrameSelector::Range(a?, b?)
            }
            Selector::Set(rs) => {
                let refs: Vec<Option<FrameRef>> = rs.iter().map(|r| self.fref(r, scope)).collect();
                FrameSelector::Set(refs.into_iter().collect::<Option<Vec<_>>>()?)
            }
        })
    }

    fn fref(&mut self, r: &Spanned<FrameRefAst>, scope: &Scope) -> Option<FrameRef> {
        let idx = match &r.node {
            FrameRefAst::First => return Some(FrameRef::First),
            FrameRefAst::Mid => return Some(FrameRef::Mid),
            FrameRefAst::Last => return Some(FrameRef::Last),
            FrameRefAst::Index(i) => *i,
            FrameRefAst::Var(v) => match scope.get(v) {
                Some(Binding::LoopInt(i)) => *i,
                _ => {
                    self.err(r.span, format!("'{v}' is not an integer loop variable"));
                    return None;
                }
            },
        };
        if idx < 0 {
            self.err(r.span, format!("frame index {idx} is negative"));
            return None;
        }
        Some(FrameRef::Index(idx))
    }

    fn pred(&mut self, p: &Spanned<Pred>, scope: &Scope) -> Option<PredIr> {
        match &p.node {
            Pred::Cmp(c) => self.cmp(c, p.span, scope),
            Pred::And(a, b) => {
                let (a, b) = (self.pred(a, scope), self.pred(b, scope));
                Some(PredIr::And(Box::new(a?), Box::new(b?)))
            }
            Pred::Or(a, b) => {
                let (a, b) = (self.pred(a, scope), self.pred(b, scope));
                Some(PredIr::Or(Box::new(a?), Box::new(b?)))
            }
            Pred::When(g, body) => {
                let (g, body) = (self.cmp(&g.node, g.span, scope), self.pred(body, scope));
                Some(PredIr::When(Box::new(g?), Box::new(body?)))
            }
        }
    }

    fn cmp(&mut self, c: &Cmp, span: Span, scope: &Scope) -> Option<PredIr> {
        match c {
            Cmp::Eq { lhs, rhs, norm } => {
                let (a, b) = (self.value_expr(lhs, scope), self.value_expr(rhs, scope));
                let (a, b) = (a?, b?);
                if a.ty != b.ty {
                    self.err(span, format!("cannot compare {} with {}", a.ty.name(), b.ty.name()));
                    return None;
                }
                let n = match norm {
                    Some(n) if !(n.node >= 1.0) || !n.node.is_finite() => {
                        self.err(n.span, format!("norm order must be at least 1, found {}", n.node));
                        return None;
                    }
                    Some(n) => n.node,
                    None if a.ty == Ty::Vector => 2.0,
                    None => 1.0,
                };
                Some(PredIr::Eq { a: a.node, b: b.node, vector: a.ty == Ty::Vector, norm: n })
            }
            Cmp::Lt(l, r) | Cmp::Gt(l, r) => {
                let (a, b) = (self.scalar_expr(l, scope), self.scalar_expr(r, scope));
                let (a, b) = (a?, b?);
                Some(if matches!(c, Cmp::Lt(..)) { PredIr::Lt(a.node, b.node) } else { PredIr::Gt(a.node, b.node) })
            }
            Cmp::Far(e, bound) => {
                let (a, b) = (self.scalar_expr(e, scope), self.scalar_expr(bound, scope));
                let (a, b) = (a?, b?);
                if !b.constant {
                    self.err(bound.span, "the bound of 'far' must not depend on the motion");
                    return None;
                }
                Some(PredIr::Far(a.node, b.node))
            }
        }
    }

    fn scalar_expr(&mut self, e: &Spanned<Expr>, scope: &Scope) -> Option<Typed> {
        let t = self.expr(e, scope)?;
        if t.ty != Ty::Scalar {
            self.err(e.span, format!("expected a scalar, found {}", t.ty.name()));
            return None;
        }
        Some(t)
    }

    /// Scalar or vector.
    fn value_expr(&mut self, e: &Spanned<Expr>, scope: &Scope) -> Option<Typed> {
        let t = self.expr(e, scope)?;
        match t.ty {
            Ty::Scalar | Ty::Vector => Some(t),
            Ty::Joint => {
                self.err(e.span, "a joint needs a field: .pos, .vel or .acc");
                None
            }
            other => {
                self.err(e.span, format!("a {} can only be passed to a distance function", other.name()));
                None
            }
        }
    }

    fn expr(&mut self, e: &Spanned<Expr>, scope: &Scope) -> Option<Typed> {
        match &e.node {
            Expr::Number(v) => Some(Typed::value(Node::Const(*v), Ty::Scalar, true)),
            Expr::Vector(els) => {
                if els.len() != 3 {
                    self.err(e.span, format!("vector literals need 3 elements, found {}", els.len()));
                    return None;
                }
                let parts: Vec<Option<Typed>> = els.iter().map(|x| self.scalar_expr(x, scope)).collect();
                let parts: Vec<Typed> = parts.into_iter().collect::<Option<_>>()?;
                let constant = parts.iter().all(|p| p.constant);
                let [x, y, z]: [Typed; 3] = parts.try_into().expect("three parts");
                Some(Typed::value(Node::Vector(Box::new([x.node, y.node, z.node])), Ty::Vector, constant))
            }
            Expr::Name(n) => match scope.get(n) {
                Some(Binding::Param(i, ParamType::Float)) => Some(Typed::value(Node::Param(*i), Ty::Scalar, true)),
                Some(Binding::Param(i, ParamType::Vec3)) => Some(Typed::value(Node::Param(*i), Ty::Vector, true)),
                Some(Binding::Let(t)) => Some(t.clone()),
                Some(Binding::LoopInt(i)) => Some(Typed::value(Node::Const(*i as f64), Ty::Scalar, true)),
                Some(Binding::LoopJoint(j)) => {
                    Some(Typed { node: Node::Const(0.0), ty: Ty::Joint, constant: false, joint: Some(*j) })
                }
                None => {
                    match self.declared.get(n) {
                        Some(&at) if at > e.span.start => {
                            self.err(e.span, format!("parameter '{n}' is used before its declaration"))
                        }
                        _ => self.err(e.span, format!("undefined name '{n}'")),
                    }
                    None
                }
            },
            Expr::Neg(inner) => {
                let t = self.value_expr(inner, scope)?;
                Some(Typed::value(Node::Neg(Box::new(t.node)), t.ty, t.constant))
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.value_expr(a, scope), self.value_expr(b, scope));
                let (a, b) = (a?, b?);
                use Ty::{Scalar as S, Vector as V};
                let ty = match (op, a.ty, b.ty) {
                    (BinOp::Add | BinOp::Sub, S, S) | (BinOp::Mul, S, S) | (BinOp::Div, S, S) => S,
                    (BinOp::Add | BinOp::Sub, V, V) | (BinOp::Mul, S, V) | (BinOp::Mul, V, S) | (BinOp::Div, V, S) => V,
                    _ => {
                        self.err(
                            e.span,
                            format!("cannot apply '{}' to {} and {}", op.symbol(), a.ty.name(), b.ty.name()),
                        );
                        return None;
                    }
                };
                Some(Typed::value(Node::Bin(*op, Box::new(a.node), Box::new(b.node)), ty, a.constant && b.constant))
            }
            Expr::Joint(name) => {
                let j = self.joint_name(name, scope)?;
                Some(Typed { node: Node::Const(0.0), ty: Ty::Joint, constant: false, joint: Some(j) })
            }
            Expr::Field(inner, field) => {
                let t = self.expr(inner, scope)?;
                match (t.ty, field.node) {
                    (Ty::Joint, Field::Pos | Field::Vel | Field::Acc) => {
                        let order = match field.node {
                            Field::Pos => 0,
                            Field::Vel => 1,
                            _ => 2,
                        };
                        let joint = t.joint.expect("joint handle carries its index");
                        Some(Typed::value(Node::Joint { joint, order }, Ty::Vector, false))
                    }
                    (Ty::Vector, Field::X | Field::Y | Field::Z) => {
                        let axis = match field.node {
                            Field::X => 0,
                            Field::Y => 1,
                            _ => 2,
                        };
                        Some(Typed::value(Node::Component(Box::new(t.node), axis), Ty::Scalar, t.constant))
                    }
                    (ty, f) => {
                        self.err(field.span, format!("a {} has no field '.{}'", ty.name(), f.name()));
                        None
                    }
                }
            }
            Expr::Call(name, args) => self.call(name, args, e.span, scope),
        }
    }

    fn call(&mut self, name: &Spanned<String>, args: &[Spanned<Expr>], span: Span, scope: &Scope) -> Option<Typed> {
        use Ty::{Scalar as S, Vector as V};
        let f = name.node.as_str();
        if !FUNCTIONS.contains(&f) {
            self.err(name.span, format!("unknown function '{f}'"));
            return None;
        }
        if f == "balance" {
            if args.is_empty() {
                self.err(span, "balance() needs at least one support joint");
                return None;
            }
            let mut joints = Vec::new();
            for a in args {
                let t = self.expr(a, scope)?;
                match t.joint {
                    Some(j) if t.ty == Ty::Joint => joints.push(j),
                    _ => {
                        self.err(a.span, format!("balance() takes joints, found {}", t.ty.name()));
                        return None;
                    }
                }
            }
            return Some(Typed::value(Node::Balance(joints), S, false));
        }
        let sig: (&[Ty], Ty) = match f {
            "dist" => (&[V, V], S),
            "distToPlane" => (&[V, Ty::Prim(PrimKind::Plane)], S),
            "distToLine" => (&[V, Ty::Prim(PrimKind::Line)], S),
            "distToSphere" => (&[V, Ty::Prim(PrimKind::Sphere)], S),
            "plane" => (&[V, S], Ty::Prim(PrimKind::Plane)),
            "line" => (&[V, V], Ty::Prim(PrimKind::Line)),
            "sphere" => (&[V, S], Ty::Prim(PrimKind::Sphere)),
            "midpoint" => (&[V, V], V),
            "dot" => (&[V, V], S),
            "norm" => (&[V], S),
            "abs" => (&[S], S),
            "min" | "max" => (&[S, S], S),
            "com" => (&[], V),
            "angleTo" => (&[V, V], S),
            _ => unreachable!("listed in FUNCTIONS"),
        };
        if args.len() != sig.0.len() {
            self.err(span, format!("{f}() takes {} argument(s), found {}", sig.0.len(), args.len()));
            return None;
        }
        let mut typed = Vec::new();
        let mut ok = true;
        for (a, want) in args.iter().zip(sig.0) {
            match self.expr(a, scope) {
                Some(t) if t.ty == *want => typed.push(t),
                Some(t) => {
                    self.err(a.span, format!("{f}() expects a {} here, found {}", want.name(), t.ty.name()));
                    ok = false;
                }
                None => ok = false,
            }
        }
        if !ok {
            return None;
        }
        let constant = typed.iter().all(|t| t.constant);
        if let Ty::Prim(kind) = sig.1 {
            if !constant {
                self.err(span, format!("{f}() arguments must not depend on the motion"));
                return None;
            }
            let node = Node::Prim(kind, typed.into_iter().map(|t| t.node).collect());
            if let Err(msg) = node.check_prim(&self.default_params()) {
                self.err(span, msg);
                return None;
            }
            return Some(Typed::value(node, sig.1, true));
        }
        let func = match f {
            "dist" => Func::Dist,
            "distToPlane" | "distToLine" | "distToSphere" => Func::DistTo,
            "midpoint" => Func::Midpoint,
            "dot" => Func::Dot,
            "norm" => Func::Norm,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "com" => Func::Com,
            "angleTo" => Func::AngleTo,
            _ => unreachable!(),
        };
        let constant = constant && func != Func::Com;
        Some(Typed::value(Node::Call(func, typed.into_iter().map(|t| t.node).collect()), sig.1, constant))
    }
}

fn literal_value(e: &Expr) -> Option<ParamValue> {
    fn scalar(e: &Expr) -> Option<f64> {
        match e {
            Expr::Number(v) => Some(*v),
            Expr::Neg(inner) => scalar(&inner.node).map(|v| -v),
            _ => None,
        }
    }
    match e {
        Expr::Vector(els) if els.len() == 3 => {
            Some(ParamValue::Vec3([scalar(&els[0].node)?, scalar(&els[1].node)?, scalar(&els[2].node)?]))
        }
        other => scalar(other).map(ParamValue::Float),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::kinematics::default_skeleton;

    fn check(src: &str) -> Result<CheckedProgram, Diagnostics> {
        typecheck(&parse(src).unwrap(), src, &default_skeleton())
    }

    fn first_error(src: &str) -> Diagnostic {
        check(src).unwrap_err().0.remove(0)
    }

    #[test]
    fn joint_resolves_to_index() {
        let p = check("task \"t\" { constraint all frames: joint(left_hand).pos.y > 1; }").unwrap();
        let PredIr::Gt(Node::Component(inner, 1), _) = &p.terms[0].pred else { panic!("{:?}", p.terms[0].pred) };
        assert!(matches!(**inner, Node::Joint { joint: 20, order: 0 }));
    }

    #[test]
    fn arity_and_type_errors() {
        let d = first_error("task \"t\" {\n  constraint all frames: dist(1, joint(head).pos) == 0;\n}");
        assert_eq!((d.line, d.col), (2, 31));
        assert!(d.message.contains("expects a vector"), "{}", d.message);
        let d = first_error("task \"t\" { constraint all frames: dist(joint(head).pos) == 0; }");
        assert!(d.message.contains("takes 2 argument"));
        let d = first_error("task \"t\" { constraint all frames: joint(head).pos == 1; }");
        assert!(d.message.contains("cannot compare vector with scalar"));
        let d = first_error("task \"t\" { constraint all frames: joint(nose).pos.y > 1; }");
        assert!(d.message.contains("unknown joint 'nose'"));
    }

    #[test]
    fn declaration_order() {
        let d = first_error("task \"t\" {\n  constraint all frames: joint(head).pos.y > h;\n  param h: float = 1;\n}");
        assert!(d.message.contains("before its declaration"), "{}", d.message);
        assert_eq!(d.line, 2);
        let d = first_error("task \"t\" { constraint all frames: joint(head).pos.y > q; }");
        assert!(d.message.contains("undefined name 'q'"));
    }

    #[test]
    fn weights_and_bounds() {
        let d = first_error("task \"t\" { constraint all frames: 1 < 2 weight -1; }");
        assert!(d.message.contains("nonnegative"));
        let d = first_error("task \"t\" { constraint all frames: 1 < 2 weight joint(head).pos.y; }");
        assert!(d.message.contains("must not depend"));
        let d = first_error("task \"t\" { constraint all frames: distToPlane(joint(head).pos, plane([0, 0, 0], 1)) == 0; }");
        assert!(d.message.contains("zero length"), "{}", d.message);
    }

    #[test]
    fn loops_unroll() {
        let p = check("task \"t\" { for j in joints { constraint frame 0: joint(j).pos.x < 1; } }").unwrap();
        assert_eq!(p.terms.len(), 22);
        assert!(p.terms[20].label.contains("j=left_hand"));
        let p = check("task \"t\" { for i in 0..2 { constraint frame i: joint(head).pos.x < i; } }").unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(p.terms[2].selector, FrameSelector::At(FrameRef::Index(2)));
    }
}
