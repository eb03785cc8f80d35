//! Tape-based reverse-mode automatic differentiation.
//!
//! Every differentiable operation appends one node to a [`Tape`]. A node
//! stores the indices of its parents and the local partial derivative with
//! respect to each parent, so the backward sweep is a single reverse pass
//! over the node list.
//!
//! Constants never reach the tape: a [`Var`] built with [`Tape::constant`]
//! (or produced by an operation whose inputs are all constants) carries its
//! value only. This keeps the tape proportional to the part of the
//! computation that actually depends on the inputs.
//!
//! ```
//! use moproc::autodiff::{gradient, Tape};
//!
//! let tape = Tape::new();
//! let a = tape.var(2.0);
//! let b = tape.var(3.0);
//! let f = a * b;
//! assert_eq!(f.value(), 6.0);
//! assert_eq!(gradient(f, &[a, b]).unwrap(), vec![3.0, 2.0]);
//! ```

use std::cell::RefCell;
use std::ops::{Add, Mul, Neg, Sub};

use super::AdError;

const CONST: u32 = u32::MAX;

#[derive(Default)]
struct Nodes {
    /// Offset of each node's first parent in `parents` / `partials`.
    start: Vec<u32>,
    parents: Vec<u32>,
    partials: Vec<f64>,
}

/// Operation record for one evaluation.
///
/// A tape is confined to one evaluation context; it is rebuilt for every
/// objective evaluation and never shared between threads.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Nodes>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.borrow().start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Creates an input variable (a leaf node).
    pub fn var(&self, value: f64) -> Var<'_> {
        let idx = self.push(&[]);
        Var { tape: self, idx, val: value }
    }

    pub fn vars(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.var(v)).collect()
    }

    /// A value that does not participate in differentiation.
    pub fn constant(&self, value: f64) -> Var<'_> {
        Var { tape: self, idx: CONST, val: value }
    }

    fn push(&self, edges: &[(u32, f64)]) -> u32 {
        let mut n = self.nodes.borrow_mut();
        let idx = n.start.len() as u32;
        let first = n.parents.len() as u32;
        n.start.push(first);
        for &(p, d) in edges {
            n.parents.push(p);
            n.partials.push(d);
        }
        idx
    }

    /// Records a node with the given value and `(parent, partial)` edges.
    /// Edges from constants are dropped; a node with no remaining edges is
    /// returned as a constant.
    pub(crate) fn node<'t>(&'t self, value: f64, edges: &[(Var<'t>, f64)]) -> Var<'t> {
        let mut live = [(0u32, 0.0f64); 4];
        let mut buf = Vec::new();
        let mut n = 0;
        for (v, d) in edges {
            if v.idx == CONST {
                continue;
            }
            if edges.len() <= 4 {
                live[n] = (v.idx, *d);
            } else {
                buf.push((v.idx, *d));
            }
            n += 1;
        }
        if n == 0 {
            return self.constant(value);
        }
        let idx = if edges.len() <= 4 { self.push(&live[..n]) } else { self.push(&buf) };
        Var { tape: self, idx, val: value }
    }

    /// `offset + Σ coef_i · v_i` as a single node.
    pub fn linear_combination<'t>(&'t self, terms: &[(Var<'t>, f64)], offset: f64) -> Var<'t> {
        let value = terms.iter().fold(offset, |acc, (v, c)| acc + v.val * c);
        self.node(value, terms)
    }

    fn adjoints(&self, output: Var<'_>) -> Vec<f64> {
        let n = self.nodes.borrow();
        let mut adj = vec![0.0; n.start.len()];
        if output.idx == CONST {
            return adj;
        }
        adj[output.idx as usize] = 1.0;
        for i in (0..=output.idx as usize).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let lo = n.start[i] as usize;
            let hi = n.start.get(i + 1).map_or(n.parents.len(), |&s| s as usize);
            for k in lo..hi {
                adj[n.parents[k] as usize] += a * n.partials[k];
            }
        }
        adj
    }
}

/// Gradient of a scalar `output` with respect to each of `inputs`.
///
/// Inputs that do not influence the output (or are constants) get 0.
pub fn gradient(output: Var<'_>, inputs: &[Var<'_>]) -> Result<Vec<f64>, AdError> {
    let tape = output.tape;
    if inputs.iter().any(|v| !std::ptr::eq(v.tape, tape)) {
        return Err(AdError::ForeignTape);
    }
    let adj = tape.adjoints(output);
    Ok(inputs
        .iter()
        .map(|v| if v.idx == CONST { 0.0 } else { adj[v.idx as usize] })
        .collect())
}

/// A differentiable scalar: tape handle, node index and current value.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
    val: f64,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.idx == CONST {
            write!(f, "Var(const {})", self.val)
        } else {
            write!(f, "Var(#{} = {})", self.idx, self.val)
        }
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.val
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn is_constant(&self) -> bool {
        self.idx == CONST
    }

    /// Value with gradient flow cut.
    pub fn detach(&self) -> Var<'t> {
        self.tape.constant(self.val)
    }

    fn unary(self, value: f64, d: f64) -> Var<'t> {
        self.tape.node(value, &[(self, d)])
    }

    pub fn sin(self) -> Self {
        self.unary(self.val.sin(), self.val.cos())
    }

    pub fn cos(self) -> Self {
        self.unary(self.val.cos(), -self.val.sin())
    }

    /// Square root; the derivative at 0 is taken as 0.
    pub fn sqrt(self) -> Result<Self, AdError> {
        if self.val < 0.0 {
            return Err(AdError::SqrtNegative(self.val));
        }
        let r = self.val.sqrt();
        let d = if r > 0.0 { 0.5 / r } else { 0.0 };
        Ok(self.unary(r, d))
    }

    pub fn div(self, rhs: Self) -> Result<Self, AdError> {
        if rhs.val == 0.0 {
            return Err(AdError::DivisionByZero);
        }
        let q = self.val / rhs.val;
        Ok(self.tape.node(q, &[(self, 1.0 / rhs.val), (rhs, -q / rhs.val)]))
    }

    /// |x|; derivative 0 at x = 0.
    pub fn abs(self) -> Self {
        let d = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.unary(self.val.abs(), d)
    }

    /// Larger argument; ties pick `self`.
    pub fn max(self, rhs: Self) -> Self {
        if self.val >= rhs.val {
            self.tape.node(self.val, &[(self, 1.0)])
        } else {
            self.tape.node(rhs.val, &[(rhs, 1.0)])
        }
    }

    /// Smaller argument; ties pick `self`.
    pub fn min(self, rhs: Self) -> Self {
        if self.val <= rhs.val {
            self.tape.node(self.val, &[(self, 1.0)])
        } else {
            self.tape.node(rhs.val, &[(rhs, 1.0)])
        }
    }

    /// max(x, lo); derivative 0 when clamped (including the tie).
    pub fn clamp_min(self, lo: f64) -> Self {
        if self.val > lo {
            self.unary(self.val, 1.0)
        } else {
            self.tape.constant(lo)
        }
    }

    /// x^p for x ≥ 0; derivative at 0 taken as 0.
    pub fn powf(self, p: f64) -> Result<Self, AdError> {
        if self.val < 0.0 {
            return Err(AdError::PowNegative(self.val));
        }
        let v = self.val.powf(p);
        let d = if self.val > 0.0 { p * self.val.powf(p - 1.0) } else { 0.0 };
        Ok(self.unary(v, d))
    }

    /// Euclidean norm of a 3-vector as a single node; the gradient at the
    /// origin is 0.
    pub fn norm3(x: Self, y: Self, z: Self) -> Self {
        let n = (x.val * x.val + y.val * y.val + z.val * z.val).sqrt();
        if n > 0.0 {
            x.tape.node(n, &[(x, x.val / n), (y, y.val / n), (z, z.val / n)])
        } else {
            x.tape.constant(0.0)
        }
    }

    pub fn dot(a: &[Self], b: &[Self]) -> Self {
        assert_eq!(a.len(), b.len(), "dot: length mismatch");
        let tape = a.first().map(|v| v.tape).expect("dot of empty slices");
        let mut edges = Vec::with_capacity(2 * a.len());
        let mut value = 0.0;
        for (x, y) in a.iter().zip(b) {
            value += x.val * y.val;
            edges.push((*x, y.val));
            edges.push((*y, x.val));
        }
        tape.node(value, &edges)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Self) -> Self {
        self.tape.node(self.val + rhs.val, &[(self, 1.0), (rhs, 1.0)])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Self) -> Self {
        self.tape.node(self.val - rhs.val, &[(self, 1.0), (rhs, -1.0)])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Self) -> Self {
        self.tape.node(self.val * rhs.val, &[(self, rhs.val), (rhs, self.val)])
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Self {
        self.unary(self.val + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Self {
        self.unary(self.val - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Self {
        self.unary(self.val * rhs, rhs)
    }
}
