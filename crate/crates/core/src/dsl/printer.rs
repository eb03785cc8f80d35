use std::fmt::Write as _;

use super::ast::*;

/// Canonical source text; parsing it yields an equal tree.
pub fn pretty_print(p: &Program) -> String {
    let mut out = format!("task {} {{\n", quote(&p.name));
    items(&mut out, &p.items, 1);
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn items(out: &mut String, items: &[Item], depth: usize) {
    let pad = "    ".repeat(depth);
    for item in items {
        match item {
            Item::Param(p) => {
                let ty = match p.ty {
                    ParamType::Float => "float",
                    ParamType::Vec3 => "vec3",
                };
                let _ = write!(out, "{pad}param {}: {ty}", p.name.node);
                if let Some(d) = &p.default {
                    let _ = write!(out, " = {}", expr(&d.node));
                }
                out.push_str(";\n");
            }
            Item::Let(l) => {
                let _ = writeln!(out, "{pad}let {} = {};", l.name.node, expr(&l.value.node));
            }
            Item::Constraint(c) => {
                let _ = write!(out, "{pad}constraint {}: {}", selector(&c.selector.node), pred(&c.pred.node));
                if let Some(w) = &c.weight {
                    let _ = write!(out, " weight {}", expr(&w.node));
                }
                out.push_str(";\n");
            }
            Item::For(f) => {
                let dom = match &f.domain.node {
                    ForDomain::Joints => "joints".to_string(),
                    ForDomain::List(names) => {
                        format!("[{}]", names.iter().map(|n| n.node.as_str()).collect::<Vec<_>>().join(", "))
                    }
                    ForDomain::Range(a, b) => format!("{a}..{b}"),
                };
                let _ = writeln!(out, "{pad}for {} in {dom} {{", f.var.node);
                self::items(out, &f.body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

fn fref(r: &FrameRefAst) -> String {
    match r {
        FrameRefAst::Index(i) => i.to_string(),
        FrameRefAst::First => "first".into(),
        FrameRefAst::Mid => "mid".into(),
        FrameRefAst::Last => "last".into(),
        FrameRefAst::Var(v) => v.clone(),
    }
}

pub fn selector(s: &Selector) -> String {
    match s {
        Selector::All => "all frames".into(),
        Selector::At(r) => format!("frame {}", fref(&r.node)),
        Selector::Range(a, b) => format!("frames {}..{}", fref(&a.node), fref(&b.node)),
        Selector::Set(rs) => format!("frames [{}]", rs.iter().map(|r| fref(&r.node)).collect::<Vec<_>>().join(", ")),
    }
}

/// Binding strength: or < and < primary.
fn pred_level(p: &Pred) -> u8 {
    match p {
        Pred::Or(..) => 0,
        Pred::And(..) => 1,
        Pred::Cmp(_) | Pred::When(..) => 2,
    }
}

fn pred_at(p: &Pred, min: u8) -> String {
    let s = pred(p);
    if pred_level(p) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn pred(p: &Pred) -> String {
    match p {
        Pred::Cmp(c) => cmp(c),
        Pred::Or(a, b) => format!("{} or {}", pred_at(&a.node, 0), pred_at(&b.node, 1)),
        Pred::And(a, b) => format!("{} and {}", pred_at(&a.node, 1), pred_at(&b.node, 2)),
        Pred::When(g, body) => format!("when ({}) {}", cmp(&g.node), pred_at(&body.node, 2)),
    }
}

pub fn cmp(c: &Cmp) -> String {
    match c {
        Cmp::Eq { lhs, rhs, norm } => {
            let mut s = format!("{} == {}", expr(&lhs.node), expr(&rhs.node));
            if let Some(n) = norm {
                let _ = write!(s, " norm {}", number(n.node));
            }
            s
        }
        Cmp::Lt(a, b) => format!("{} < {}", expr(&a.node), expr(&b.node)),
        Cmp::Gt(a, b) => format!("{} > {}", expr(&a.node), expr(&b.node)),
        Cmp::Far(e, b) => format!("far({}, {})", expr(&e.node), expr(&b.node)),
    }
}

fn number(v: f64) -> String {
    format!("{v}")
}

const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 4;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Neg(_) => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

fn expr_at(e: &Expr, min: u8) -> String {
    let s = expr(e);
    if expr_prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Number(v) => number(*v),
        Expr::Vector(els) => format!("[{}]", els.iter().map(|x| expr(&x.node)).collect::<Vec<_>>().join(", ")),
        Expr::Name(n) => n.clone(),
        Expr::Neg(inner) => format!("-{}", expr_at(&inner.node, PREC_UNARY)),
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            format!("{} {} {}", expr_at(&a.node, p), op.symbol(), expr_at(&b.node, p + 1))
        }
        Expr::Joint(j) => format!("joint({})", j.node),
        Expr::Field(inner, f) => format!("{}.{}", expr_at(&inner.node, PREC_ATOM), f.node.name()),
        Expr::Call(name, args) => {
            format!("{}({})", name.node, args.iter().map(|a| expr(&a.node)).collect::<Vec<_>>().join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn round_trip(src: &str) {
        let a = parse(src).unwrap();
        let printed = pretty_print(&a);
        let b = parse(&printed).unwrap_or_else(|d| panic!("{d}\n{printed}"));
        assert_eq!(a, b, "{printed}");
        assert_eq!(pretty_print(&b), printed);
    }

    #[test]
    fn empty_task_is_two_lines() {
        let p = parse("task \"t\" {}").unwrap();
        assert_eq!(pretty_print(&p), "task \"t\" {\n}\n");
    }

    #[test]
    fn round_trips() {
        round_trip("task \"a \\\"q\\\"\" { param v: vec3 = [1, -2.5, 0.1]; param w: float; }");
        round_trip("task \"t\" { let a = -(1 - 2) * -3 / (4 / 5) - -joint(head).pos.y; }");
        round_trip("task \"t\" { constraint all frames: (1 < 2 or 3 < 4) and (5 < 6 and 7 > 8) or far(1, 2); }");
        round_trip("task \"t\" { constraint frame mid: when (abs(1) < 2) (3 < 4 and 5 < 6) weight 0.1 + 0.2; }");
        round_trip("task \"t\" { for j in joints { for i in 0..2 { constraint frame i: joint(j).vel == [0, 0, 1e-7] norm 1; } } }");
        round_trip("task \"t\" { constraint frames [first, 3]: (joint(a).pos - joint(b).pos).x > 0.30000000000000004; }");
    }
}
