//! Reverse-mode automatic differentiation over `f64` scalars.
//!
//! A [`Tape`] is an append-only record of scalar operations. Every record
//! caches its forward value, and operands always point at earlier records, so
//! the tape is topologically ordered by construction and a single reverse
//! sweep computes all adjoints.
//!
//! Leaves come in two flavours: constants and *parameters*. Parameters are
//! registered in creation order; [`Tape::backward`] returns the gradient with
//! respect to exactly those leaves, in that order.
//!
//! ```
//! use gdl_core::autodiff::Tape;
//!
//! let mut tape = Tape::new();
//! let t = tape.param(3.0);
//! let sq = tape.mul(t, t);
//! let grad = tape.backward(sq).unwrap();
//! assert_eq!(grad[0], 6.0);
//! ```

use std::ops::Index;

use crate::error::{Error, Result};

/// Index of a record on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Operations that can be recorded on a tape.
///
/// `Add` and `Max` are n-ary (at least one operand), `Mul` is binary and the
/// rest are unary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Mul,
    Neg,
    Exp,
    Log,
    Relu,
    Tanh,
    Sigmoid,
    Max,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Mul => "mul",
            Op::Neg => "neg",
            Op::Exp => "exp",
            Op::Log => "log",
            Op::Relu => "relu",
            Op::Tanh => "tanh",
            Op::Sigmoid => "sigmoid",
            Op::Max => "max",
        }
    }

    fn check_arity(self, got: usize) -> Result<()> {
        let (ok, expected) = match self {
            Op::Add | Op::Max => (got >= 1, "at least 1"),
            Op::Mul => (got == 2, "2"),
            _ => (got == 1, "1"),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Arity {
                op: self.name(),
                expected,
                got,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Leaf,
    Op(Op),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    kind: Kind,
    // operand range in `Tape::operands`
    start: u32,
    len: u32,
    value: f64,
}

/// Append-only record of scalar operations.
///
/// Equality is structural: two tapes are equal when they hold the same
/// records with bit-identical cached values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tape {
    nodes: Vec<Node>,
    operands: Vec<NodeId>,
    params: Vec<NodeId>,
}

/// Partial derivatives of one output with respect to every registered
/// parameter, in registration order.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector(Vec<f64>);

impl GradientVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for GradientVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for GradientVector {
    fn from(v: Vec<f64>) -> Self {
        GradientVector(v)
    }
}

fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Tape {
            nodes: Vec::with_capacity(nodes),
            operands: Vec::with_capacity(nodes * 2),
            params: Vec::new(),
        }
    }

    /// Drops every record but keeps the allocations.
    pub fn clear(&mut self) {
        self.nodes.clear();
        self.operands.clear();
        self.params.clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[NodeId] {
        &self.params
    }

    pub fn is_valid(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if self.is_valid(id) {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                id: id.index(),
                len: self.nodes.len(),
            })
        }
    }

    /// Cached forward value of a record.
    ///
    /// # Panics
    /// If `id` does not belong to this tape.
    pub fn value(&self, id: NodeId) -> f64 {
        self.nodes[id.index()].value
    }

    pub fn values(&self, ids: &[NodeId]) -> Vec<f64> {
        ids.iter().map(|&id| self.value(id)).collect()
    }

    fn push_leaf(&mut self, value: f64) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind: Kind::Leaf,
            start: 0,
            len: 0,
            value,
        });
        id
    }

    pub fn constant(&mut self, value: f64) -> NodeId {
        self.push_leaf(value)
    }

    pub fn constants(&mut self, values: &[f64]) -> Vec<NodeId> {
        values.iter().map(|&v| self.constant(v)).collect()
    }

    /// Appends a leaf and registers it as a differentiable parameter.
    pub fn param(&mut self, value: f64) -> NodeId {
        let id = self.push_leaf(value);
        self.params.push(id);
        id
    }

    pub fn param_slice(&mut self, values: &[f64]) -> Vec<NodeId> {
        values.iter().map(|&v| self.param(v)).collect()
    }

    /// Records `op` applied to `operands` after validating ids, arity and the
    /// log domain.
    pub fn record(&mut self, op: Op, operands: &[NodeId]) -> Result<NodeId> {
        op.check_arity(operands.len())?;
        for &id in operands {
            self.check(id)?;
        }
        if op == Op::Log {
            let x = self.value(operands[0]);
            if x.is_nan() || x <= 0.0 {
                return Err(Error::LogDomain(x));
            }
        }
        Ok(self.push_op(op, operands))
    }

    fn push_op(&mut self, op: Op, operands: &[NodeId]) -> NodeId {
        debug_assert!(op.check_arity(operands.len()).is_ok());
        let value = self.eval_op(op, operands.iter().map(|id| self.nodes[id.index()].value));
        let id = NodeId(self.nodes.len() as u32);
        let start = self.operands.len() as u32;
        self.operands.extend_from_slice(operands);
        self.nodes.push(Node {
            kind: Kind::Op(op),
            start,
            len: operands.len() as u32,
            value,
        });
        id
    }

    fn eval_op(&self, op: Op, mut xs: impl Iterator<Item = f64>) -> f64 {
        let first = xs.next().unwrap_or(0.0);
        match op {
            Op::Add => xs.fold(first, |acc, x| acc + x),
            Op::Mul => first * xs.next().unwrap_or(1.0),
            Op::Neg => -first,
            Op::Exp => first.exp(),
            Op::Log => first.ln(),
            Op::Relu => relu(first),
            Op::Tanh => first.tanh(),
            Op::Sigmoid => sigmoid(first),
            Op::Max => xs.fold(first, |acc, x| if x > acc { x } else { acc }),
        }
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push_op(Op::Add, &[a, b])
    }

    /// N-ary sum, folded left in operand order.
    ///
    /// # Panics
    /// If `terms` is empty.
    pub fn sum(&mut self, terms: &[NodeId]) -> NodeId {
        assert!(!terms.is_empty(), "sum of no terms");
        self.push_op(Op::Add, terms)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push_op(Op::Mul, &[a, b])
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let c = self.constant(c);
        self.mul(a, c)
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.push_op(Op::Neg, &[a])
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.push_op(Op::Exp, &[a])
    }

    pub fn log(&mut self, a: NodeId) -> Result<NodeId> {
        self.record(Op::Log, &[a])
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        self.push_op(Op::Relu, &[a])
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.push_op(Op::Tanh, &[a])
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.push_op(Op::Sigmoid, &[a])
    }

    pub fn max(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push_op(Op::Max, &[a, b])
    }

    pub fn max_of(&mut self, xs: &[NodeId]) -> NodeId {
        assert!(!xs.is_empty(), "max of no terms");
        self.push_op(Op::Max, xs)
    }

    pub fn square(&mut self, a: NodeId) -> NodeId {
        self.mul(a, a)
    }

    /// Adjoint of every record with respect to `output`.
    pub fn adjoints(&self, output: NodeId) -> Result<Vec<f64>> {
        self.check(output)?;
        let mut adj = vec![0.0; output.index() + 1];
        adj[output.index()] = 1.0;
        for i in (0..=output.index()).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = self.nodes[i];
            let op = match node.kind {
                Kind::Leaf => continue,
                Kind::Op(op) => op,
            };
            let ops = &self.operands[node.start as usize..(node.start + node.len) as usize];
            match op {
                Op::Add => {
                    for o in ops {
                        adj[o.index()] += a;
                    }
                }
                Op::Mul => {
                    let (x, y) = (ops[0], ops[1]);
                    let (vx, vy) = (self.value(x), self.value(y));
                    adj[x.index()] += a * vy;
                    adj[y.index()] += a * vx;
                }
                Op::Neg => adj[ops[0].index()] -= a,
                Op::Exp => adj[ops[0].index()] += a * node.value,
                Op::Log => adj[ops[0].index()] += a / self.value(ops[0]),
                Op::Relu => {
                    // subgradient 0 at the kink
                    if self.value(ops[0]) > 0.0 {
                        adj[ops[0].index()] += a;
                    }
                }
                Op::Tanh => adj[ops[0].index()] += a * (1.0 - node.value * node.value),
                Op::Sigmoid => adj[ops[0].index()] += a * node.value * (1.0 - node.value),
                Op::Max => {
                    // first operand attaining the maximum takes the gradient
                    if let Some(o) = ops.iter().find(|o| self.value(**o) == node.value) {
                        adj[o.index()] += a;
                    }
                }
            }
        }
        Ok(adj)
    }

    /// Gradient of `output` with respect to all registered parameters.
    pub fn backward(&self, output: NodeId) -> Result<GradientVector> {
        let adj = self.adjoints(output)?;
        Ok(GradientVector(
            self.params
                .iter()
                .map(|p| adj.get(p.index()).copied().unwrap_or(0.0))
                .collect(),
        ))
    }

    /// Recomputes every value from the leaves without touching the cache.
    pub fn replay(&self) -> Vec<f64> {
        let mut values: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node.kind {
                Kind::Leaf => node.value,
                Kind::Op(op) => {
                    let ops = &self.operands[node.start as usize..(node.start + node.len) as usize];
                    self.eval_op(op, ops.iter().map(|o| values[o.index()]))
                }
            };
            values.push(v);
        }
        values
    }

    /// Operation and operands of a record; `None` for leaves.
    pub fn record_of(&self, id: NodeId) -> Option<(Op, &[NodeId])> {
        let node = self.nodes.get(id.index())?;
        match node.kind {
            Kind::Leaf => None,
            Kind::Op(op) => Some((
                op,
                &self.operands[node.start as usize..(node.start + node.len) as usize],
            )),
        }
    }
}

/// Central-difference gradient of `f` at `point`.
///
/// `f` receives a fresh tape and the parameter nodes holding `point` and
/// returns the scalar output node.
pub fn numeric_gradient<F, E>(f: &mut F, point: &[f64], step: f64) -> Result<Vec<f64>, E>
where
    F: FnMut(&mut Tape, &[NodeId]) -> Result<NodeId, E>,
    E: From<Error>,
{
    if step.is_nan() || step <= 0.0 {
        return Err(Error::invalid(format!(
            "finite-difference step must be positive, got {step}"
        ))
        .into());
    }
    let mut tape = Tape::new();
    let mut shifted = point.to_vec();
    let mut eval = |tape: &mut Tape, at: &[f64]| -> Result<f64, E> {
        tape.clear();
        let ids = tape.param_slice(at);
        let out = f(tape, &ids)?;
        Ok(tape.value(out))
    };
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        shifted[i] = point[i] + step;
        let plus = eval(&mut tape, &shifted)?;
        shifted[i] = point[i] - step;
        let minus = eval(&mut tape, &shifted)?;
        shifted[i] = point[i];
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

/// Reverse-mode gradient of `f` at `point`, with the same calling
/// convention as [`numeric_gradient`].
pub fn analytic_gradient<F, E>(f: &mut F, point: &[f64]) -> Result<Vec<f64>, E>
where
    F: FnMut(&mut Tape, &[NodeId]) -> Result<NodeId, E>,
    E: From<Error>,
{
    let mut tape = Tape::new();
    let ids = tape.param_slice(point);
    let out = f(&mut tape, &ids)?;
    let grad = tape.backward(out)?;
    // f may register further parameters of its own; only `point` matters here
    Ok(grad.into_vec()[..point.len()].to_vec())
}

const RELATIVE_EPS: f64 = 1e-12;

/// Largest relative disagreement `|analytic - numeric| / (|analytic| + 1e-12)`
/// between reverse-mode and central-difference gradients of `f` at `point`.
pub fn finite_diff_check<F, E>(mut f: F, point: &[f64], step: f64) -> Result<f64, E>
where
    F: FnMut(&mut Tape, &[NodeId]) -> Result<NodeId, E>,
    E: From<Error>,
{
    let numeric = numeric_gradient(&mut f, point, step)?;
    let analytic = analytic_gradient(&mut f, point)?;
    Ok(analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).abs() / (a.abs() + RELATIVE_EPS))
        .fold(0.0, f64::max))
}
