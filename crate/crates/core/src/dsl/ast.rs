use super::Span;

/// A node with its source span. Equality ignores the span so that trees
/// parsed from differently formatted text compare equal.
#[derive(Clone, Debug)]
pub struct Spanned<T> {
    pub node: T,
    pub span: Span,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: Span) -> Self {
        Self { node, span }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

pub type Ident = Spanned<String>;

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub name: String,
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Param(ParamDecl),
    Let(LetDecl),
    Constraint(ConstraintDecl),
    For(ForLoop),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamType {
    Float,
    Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: Ident,
    pub ty: ParamType,
    pub default: Option<Spanned<Expr>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LetDecl {
    pub name: Ident,
    pub value: Spanned<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDecl {
    pub selector: Spanned<Selector>,
    pub pred: Spanned<Pred>,
    pub weight: Option<Spanned<Expr>>,
}

/// `for v in domain { ... }`, unrolled before checking.
#[derive(Clone, Debug, PartialEq)]
pub struct ForLoop {
    pub var: Ident,
    pub domain: Spanned<ForDomain>,
    pub body: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ForDomain {
    /// Every skeleton joint in index order.
    Joints,
    /// Named joints.
    List(Vec<Ident>),
    /// Inclusive integer range.
    Range(i64, i64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameRefAst {
    Index(i64),
    First,
    Mid,
    Last,
    /// Loop variable bound to an integer.
    Var(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    All,
    At(Spanned<FrameRefAst>),
    Range(Spanned<FrameRefAst>, Spanned<FrameRefAst>),
    Set(Vec<Spanned<FrameRefAst>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pred {
    Cmp(Cmp),
    And(Box<Spanned<Pred>>, Box<Spanned<Pred>>),
    Or(Box<Spanned<Pred>>, Box<Spanned<Pred>>),
    /// Body applies only where the guard holds; the guard is not
    /// differentiated.
    When(Box<Spanned<Cmp>>, Box<Spanned<Pred>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cmp {
    /// `lhs == rhs [norm n]`.
    Eq { lhs: Spanned<Expr>, rhs: Spanned<Expr>, norm: Option<Spanned<f64>> },
    Lt(Spanned<Expr>, Spanned<Expr>),
    Gt(Spanned<Expr>, Spanned<Expr>),
    /// `far(e, bound)`: pushes `e` up to at least `bound`.
    Far(Spanned<Expr>, Spanned<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Pos,
    Vel,
    Acc,
    X,
    Y,
    Z,
}

impl Field {
    pub const ALL: [(&'static str, Field); 6] =
        [("pos", Field::Pos), ("vel", Field::Vel), ("acc", Field::Acc), ("x", Field::X), ("y", Field::Y), ("z", Field::Z)];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, f)| *f == self).map(|(s, _)| *s).expect("listed")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    Vector(Vec<Spanned<Expr>>),
    Name(String),
    Neg(Box<Spanned<Expr>>),
    Binary(BinOp, Box<Spanned<Expr>>, Box<Spanned<Expr>>),
    /// `joint(name)`.
    Joint(Ident),
    Field(Box<Spanned<Expr>>, Spanned<Field>),
    Call(Ident, Vec<Spanned<Expr>>),
}
