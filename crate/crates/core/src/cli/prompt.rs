//! Text prompt that teaches a language model to write motion programs.

use crate::kinematics::default_skeleton;

pub const GRAMMAR: &str = include_str!("grammar.ebnf");

const PREAMBLE: &str = "\
You write motion programs for a skeletal character. A motion program is a
named task holding parameters, `let` bindings and constraints. Each
constraint selects frames and states a predicate about joints on those
frames; the optimizer searches for a natural motion that makes every
predicate hold. Reply with a single program and nothing else.

Rules:
- Units are meters, seconds and radians. The y axis points up, the ground
  is y = 0 and the character starts near the origin facing +z.
- `==` asks for equality, `<` and `>` are one-sided. `and` requires both
  sides, `or` requires either.
- Prefer few constraints. Constrain only what the task needs; the prior
  fills in the rest of the body.
- Declare tunable numbers with `param` and give every parameter a default.
- Frame selectors may name `first`, `mid`, `last` or 0-based indices.
";

/// `(signature, meaning)` for every built-in.
pub const ATOMS: &[(&str, &str)] = &[
    ("joint(name)", "a skeleton joint; see the joint list below"),
    ("j.pos / j.vel / j.acc", "world position, velocity (m/s) and acceleration (m/s^2) of joint j"),
    ("v.x / v.y / v.z", "one component of a vector"),
    ("[a, b, c]", "vector literal"),
    ("dist(a, b)", "Euclidean distance between two points"),
    ("plane(n, d)", "plane n . p = d; n is normalized for you"),
    ("line(p, d)", "infinite line through p along d"),
    ("sphere(c, r)", "sphere with center c and radius r"),
    ("distToPlane(p, plane)", "unsigned distance from a point to a plane"),
    ("distToLine(p, line)", "distance from a point to a line"),
    ("distToSphere(p, sphere)", "distance from a point to the sphere surface"),
    ("midpoint(a, b)", "point halfway between a and b"),
    ("dot(a, b)", "dot product"),
    ("norm(v)", "vector length"),
    ("abs(x) / min(x, y) / max(x, y)", "scalar helpers"),
    ("com()", "center of mass of the body"),
    ("angleTo(v, d)", "angle in radians between vector v and direction d"),
    ("balance(joint(a), joint(b), ...)", "horizontal distance from the center of mass to the support area of the listed joints; 0 when balanced"),
    ("far(e, r)", "predicate: e is at least r"),
    ("a == b norm n", "equality measured with the n-norm instead of the default"),
    ("when (cmp) pred", "pred applies only on frames where cmp holds"),
    ("for j in joints { ... }", "repeat items for every joint; also `for j in [a, b]` and `for i in 0..3`"),
    ("constraint ... weight w", "relative importance of a constraint, default 1"),
];

/// Preamble, grammar, built-ins and, when `description` is not blank, the
/// task to program.
pub fn render(description: &str) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("\nGrammar (EBNF):\n\n```ebnf\n");
    out.push_str(GRAMMAR);
    if !GRAMMAR.ends_with('\n') {
        out.push('\n');
    }
    out.push_str("```\n\nBuilt-ins:\n\n");
    let width = ATOMS.iter().map(|(s, _)| s.chars().count()).max().unwrap_or(0);
    for (sig, meaning) in ATOMS {
        out.push_str(&format!("  {sig:<width$}  {meaning}\n"));
    }
    let names: Vec<String> = default_skeleton().joints.iter().map(|j| j.name.clone()).collect();
    out.push_str("\nJoints:\n\n  ");
    out.push_str(&names.join(", "));
    out.push_str("\n\nExample:\n\n```\n");
    out.push_str(EXAMPLE);
    out.push_str("```\n");
    let description = description.trim();
    if !description.is_empty() {
        out.push_str("\nTask:\n\n");
        out.push_str(description);
        out.push('\n');
    }
    out
}

const EXAMPLE: &str = "\
task \"touch head\" {
  param contact: float = 0.1;
  constraint frames mid..last: dist(joint(left_hand).pos, joint(head).pos) < contact;
  constraint all frames: joint(left_foot).pos.y == 0 and joint(right_foot).pos.y == 0;
}
";
