use crate::autodiff::tensor::{matmul_raw, Tensor};
use crate::error::{shape_err, Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The closed set of differentiable operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OpKind {
    MatMul,
    Add,
    Sub,
    Mul,
    ScalarMul(f64),
    Tanh,
    Sin,
    Sum,
    Mean,
    Square,
}

impl OpKind {
    fn arity(self) -> usize {
        match self {
            OpKind::MatMul | OpKind::Add | OpKind::Sub | OpKind::Mul => 2,
            _ => 1,
        }
    }
}

/// How the right operand of an elementwise op lines up with the left one.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Broadcast {
    Same,
    /// One of the operands has a single element.
    ScalarLhs,
    ScalarRhs,
    /// A `(1, n)` row repeated over every row of an `(m, n)` matrix.
    RowLhs,
    RowRhs,
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Binary(OpKind, Var, Var, Broadcast),
    Unary(OpKind, Var),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Define-by-run reverse-mode tape.
///
/// Nodes are appended in evaluation order, so every operand index is smaller
/// than its consumer's and the backward sweep is a single reverse pass.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records an input tensor. Gradients are only reported for leaves that
    /// ask for them.
    pub fn leaf(&mut self, value: Tensor, requires_grad: bool) -> Var {
        self.push(value, Op::Leaf, requires_grad)
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value, false)
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    pub fn requires_grad(&self, var: Var) -> bool {
        self.nodes[var.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node { value, op, requires_grad });
        Var(self.nodes.len() - 1)
    }

    /// Evaluates `kind` on `operands` and records the result.
    pub fn apply(&mut self, kind: OpKind, operands: &[Var]) -> Result<Var> {
        if operands.len() != kind.arity() {
            return Err(shape_err(format!(
                "{kind:?} takes {} operands, got {}",
                kind.arity(),
                operands.len()
            )));
        }
        match kind {
            OpKind::MatMul => self.matmul(operands[0], operands[1]),
            OpKind::Add | OpKind::Sub | OpKind::Mul => {
                self.elementwise(kind, operands[0], operands[1])
            }
            OpKind::ScalarMul(s) => Ok(self.scalar_mul(operands[0], s)),
            OpKind::Tanh => Ok(self.tanh(operands[0])),
            OpKind::Sin => Ok(self.sin(operands[0])),
            OpKind::Sum => Ok(self.sum(operands[0])),
            OpKind::Mean => Ok(self.mean(operands[0])),
            OpKind::Square => Ok(self.square(operands[0])),
        }
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows() {
            return Err(shape_err(format!(
                "matmul of {:?} and {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
        let out = Tensor::matrix(m, n, matmul_raw(ta.data(), tb.data(), m, k, n))?;
        let rg = self.requires_grad(a) || self.requires_grad(b);
        Ok(self.push(out, Op::Binary(OpKind::MatMul, a, b, Broadcast::Same), rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(OpKind::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(OpKind::Sub, a, b)
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(OpKind::Mul, a, b)
    }

    fn elementwise(&mut self, kind: OpKind, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let bc = broadcast_of(ta, tb)?;
        let shape = match bc {
            Broadcast::ScalarLhs | Broadcast::RowLhs => tb.shape().to_vec(),
            _ => ta.shape().to_vec(),
        };
        let f: fn(f64, f64) -> f64 = match kind {
            OpKind::Add => |x, y| x + y,
            OpKind::Sub => |x, y| x - y,
            OpKind::Mul => |x, y| x * y,
            _ => unreachable!("not an elementwise binary op"),
        };
        let n: usize = shape.iter().product();
        let cols = shape.get(1).copied().unwrap_or(1).max(1);
        let (da, db) = (ta.data(), tb.data());
        let data: Vec<f64> = match bc {
            Broadcast::Same => da.iter().zip(db).map(|(&x, &y)| f(x, y)).collect(),
            Broadcast::ScalarRhs => da.iter().map(|&x| f(x, db[0])).collect(),
            Broadcast::ScalarLhs => db.iter().map(|&y| f(da[0], y)).collect(),
            Broadcast::RowRhs => (0..n).map(|i| f(da[i], db[i % cols])).collect(),
            Broadcast::RowLhs => (0..n).map(|i| f(da[i % cols], db[i])).collect(),
        };
        let rg = self.requires_grad(a) || self.requires_grad(b);
        let out = Tensor::new(shape, data)?;
        Ok(self.push(out, Op::Binary(kind, a, b, bc), rg))
    }

    fn unary(&mut self, kind: OpKind, a: Var, out: Tensor) -> Var {
        let rg = self.requires_grad(a);
        self.push(out, Op::Unary(kind, a), rg)
    }

    pub fn scalar_mul(&mut self, a: Var, s: f64) -> Var {
        let out = self.value(a).map(|v| v * s);
        self.unary(OpKind::ScalarMul(s), a, out)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.unary(OpKind::Tanh, a, out)
    }

    pub fn sin(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::sin);
        self.unary(OpKind::Sin, a, out)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| v * v);
        self.unary(OpKind::Square, a, out)
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        self.unary(OpKind::Sum, a, Tensor::scalar(s))
    }

    /// Mean of all elements, as a scalar.
    pub fn mean(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let m = t.data().iter().sum::<f64>() / t.len() as f64;
        self.unary(OpKind::Mean, a, Tensor::scalar(m))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lt = self.value(loss);
        if lt.len() != 1 {
            return Err(Error::NotScalar(lt.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::full(lt.shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            match node.op {
                Op::Leaf => {
                    grads[idx] = Some(g);
                }
                Op::Unary(kind, a) => {
                    if self.requires_grad(a) {
                        let ga = self.unary_grad(kind, a, &node.value, &g);
                        accumulate(&mut grads[a.0], ga);
                    }
                }
                Op::Binary(kind, a, b, bc) => {
                    let (ga, gb) = self.binary_grad(kind, a, b, bc, &g);
                    if self.requires_grad(a) {
                        accumulate(&mut grads[a.0], ga);
                    }
                    if self.requires_grad(b) {
                        accumulate(&mut grads[b.0], gb);
                    }
                }
            }
        }

        // Leaves that asked for gradients but were never reached get zeros.
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.requires_grad && matches!(node.op, Op::Leaf) && grads[idx].is_none() {
                grads[idx] = Some(Tensor::zeros(node.value.shape()));
            }
        }
        // Interior nodes were consumed above; only leaves remain populated.
        Ok(Gradients { grads })
    }

    fn unary_grad(&self, kind: OpKind, a: Var, out: &Tensor, g: &Tensor) -> Tensor {
        let x = self.value(a);
        let zip = |f: &dyn Fn(f64, f64) -> f64, other: &Tensor| -> Tensor {
            let data = g.data().iter().zip(other.data()).map(|(&gi, &oi)| f(gi, oi)).collect();
            Tensor::new(x.shape().to_vec(), data).expect("shape preserved")
        };
        match kind {
            OpKind::ScalarMul(s) => g.map(|v| v * s),
            OpKind::Tanh => zip(&|gi, y| gi * (1.0 - y * y), out),
            OpKind::Sin => zip(&|gi, xi| gi * xi.cos(), x),
            OpKind::Square => zip(&|gi, xi| 2.0 * gi * xi, x),
            OpKind::Sum => Tensor::full(x.shape(), g.data()[0]),
            OpKind::Mean => Tensor::full(x.shape(), g.data()[0] / x.len() as f64),
            _ => unreachable!("binary op in unary position"),
        }
    }

    fn binary_grad(
        &self,
        kind: OpKind,
        a: Var,
        b: Var,
        bc: Broadcast,
        g: &Tensor,
    ) -> (Tensor, Tensor) {
        let (ta, tb) = (self.value(a), self.value(b));
        if kind == OpKind::MatMul {
            let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
            let ga = matmul_raw(g.data(), tb.transpose().data(), m, n, k);
            let gb = matmul_raw(ta.transpose().data(), g.data(), k, m, n);
            return (
                Tensor::matrix(m, k, ga).expect("matmul grad shape"),
                Tensor::matrix(k, n, gb).expect("matmul grad shape"),
            );
        }
        let cols = g.cols().max(1);
        // Gradients in the broadcast (output) shape first.
        let (full_a, full_b): (Vec<f64>, Vec<f64>) = match kind {
            OpKind::Add => (g.data().to_vec(), g.data().to_vec()),
            OpKind::Sub => (g.data().to_vec(), g.data().iter().map(|v| -v).collect()),
            OpKind::Mul => {
                let at = |i: usize| expand(ta, bc, true, i, cols);
                let bt = |i: usize| expand(tb, bc, false, i, cols);
                let n = g.len();
                (
                    (0..n).map(|i| g.data()[i] * bt(i)).collect(),
                    (0..n).map(|i| g.data()[i] * at(i)).collect(),
                )
            }
            _ => unreachable!("unary op in binary position"),
        };
        let reduce = |full: Vec<f64>, target: &Tensor, lhs: bool| -> Tensor {
            let data = match (bc, lhs) {
                (Broadcast::ScalarLhs, true) | (Broadcast::ScalarRhs, false) => {
                    vec![full.iter().sum()]
                }
                (Broadcast::RowLhs, true) | (Broadcast::RowRhs, false) => {
                    let mut acc = vec![0.0; cols];
                    for (i, v) in full.iter().enumerate() {
                        acc[i % cols] += v;
                    }
                    acc
                }
                _ => full,
            };
            Tensor::new(target.shape().to_vec(), data).expect("reduced grad shape")
        };
        (reduce(full_a, ta, true), reduce(full_b, tb, false))
    }
}

fn expand(t: &Tensor, bc: Broadcast, lhs: bool, i: usize, cols: usize) -> f64 {
    match (bc, lhs) {
        (Broadcast::ScalarLhs, true) | (Broadcast::ScalarRhs, false) => t.data()[0],
        (Broadcast::RowLhs, true) | (Broadcast::RowRhs, false) => t.data()[i % cols],
        _ => t.data()[i],
    }
}

fn broadcast_of(a: &Tensor, b: &Tensor) -> Result<Broadcast> {
    if a.shape() == b.shape() {
        return Ok(Broadcast::Same);
    }
    if b.len() == 1 {
        return Ok(Broadcast::ScalarRhs);
    }
    if a.len() == 1 {
        return Ok(Broadcast::ScalarLhs);
    }
    let is_row_of = |row: &Tensor, full: &Tensor| {
        row.rank() == 2 && full.rank() == 2 && row.rows() == 1 && row.cols() == full.cols()
    };
    if is_row_of(b, a) {
        return Ok(Broadcast::RowRhs);
    }
    if is_row_of(a, b) {
        return Ok(Broadcast::RowLhs);
    }
    Err(shape_err(format!(
        "elementwise op on {:?} and {:?}",
        a.shape(),
        b.shape()
    )))
}

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(acc) => {
            for (x, y) in acc.data_mut().iter_mut().zip(g.data()) {
                *x += y;
            }
        }
        None => *slot = Some(g),
    }
}

/// Leaf gradients produced by [`Tape::backward`].
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of a leaf that was recorded with `requires_grad = true`.
    pub fn get(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, var: Var) -> Option<Tensor> {
        self.grads.get_mut(var.0).and_then(Option::take)
    }
}
