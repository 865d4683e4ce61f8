use std::collections::HashMap;

use super::matrix::{gemm, Matrix};
use super::AutodiffError;

/// Handle to a node of a [`Graph`]. Ids are issued in insertion order, so every node's
/// arguments have smaller ids than the node itself and id order is a topological order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    /// Per-point data such as a coordinate column; the only leaves `input_derivative` accepts.
    Input,
    Parameter,
    Constant,
}

#[derive(Clone, Debug)]
pub enum Op {
    Leaf(LeafKind),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Div(NodeId, NodeId),
    /// `scale · a + shift` with compile-time constants.
    ScaleShift { arg: NodeId, scale: f64, shift: f64 },
    Tanh(NodeId),
    Exp(NodeId),
    Square(NodeId),
    /// Non-smooth; evaluates and back-propagates a subgradient but has no input derivative.
    Abs(NodeId),
    /// `input · weight (+ bias broadcast over rows)`.
    Affine { input: NodeId, weight: NodeId, bias: Option<NodeId> },
    Sum(NodeId),
    Mean(NodeId),
}

impl Op {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Op::Leaf(LeafKind::Input) => "input",
            Op::Leaf(LeafKind::Parameter) => "parameter",
            Op::Leaf(LeafKind::Constant) => "constant",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Div(..) => "div",
            Op::ScaleShift { .. } => "scale-shift",
            Op::Tanh(_) => "tanh",
            Op::Exp(_) => "exp",
            Op::Square(_) => "square",
            Op::Abs(_) => "abs",
            Op::Affine { .. } => "affine",
            Op::Sum(_) => "sum",
            Op::Mean(_) => "mean",
        }
    }

    fn args(&self) -> ([Option<NodeId>; 3], usize) {
        match *self {
            Op::Leaf(_) => ([None, None, None], 0),
            Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) => {
                ([Some(a), Some(b), None], 2)
            }
            Op::ScaleShift { arg, .. } => ([Some(arg), None, None], 1),
            Op::Tanh(a) | Op::Exp(a) | Op::Square(a) | Op::Abs(a) | Op::Sum(a) | Op::Mean(a) => {
                ([Some(a), None, None], 1)
            }
            Op::Affine { input, weight, bias } => ([Some(input), Some(weight), bias], 3),
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    rows: usize,
    cols: usize,
    name: Option<String>,
    constant: Option<Matrix>,
}

/// A recorded computation over dense matrices.
///
/// Graphs are built once and evaluated many times with different leaf bindings. Input
/// derivatives are themselves graph nodes (see [`Graph::input_derivative`]), so a loss that
/// contains `∂T/∂x` can be differentiated with respect to parameters by an ordinary
/// reverse sweep.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    tangents: HashMap<(NodeId, NodeId), Option<NodeId>>,
    tanh_slopes: HashMap<NodeId, NodeId>,
}

/// Values for the input and parameter leaves of a graph.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    values: HashMap<NodeId, Matrix>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, leaf: NodeId, value: Matrix) {
        self.values.insert(leaf, value);
    }

    /// Overwrite an existing binding in place (no reallocation when the shape is unchanged).
    pub fn set_from_slice(&mut self, leaf: NodeId, rows: usize, cols: usize, data: &[f64]) {
        let slot = self.values.entry(leaf).or_insert_with(|| Matrix::zeros(rows, cols));
        slot.reset_shape(rows, cols);
        slot.as_mut_slice().copy_from_slice(data);
    }

    pub fn get(&self, leaf: NodeId) -> Option<&Matrix> {
        self.values.get(&leaf)
    }
}

/// Forward values of every node, kept for the reverse sweep.
#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    values: Vec<Matrix>,
}

impl Evaluation {
    pub fn value(&self, id: NodeId) -> &Matrix {
        &self.values[id.0]
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        self.values[id.0].item()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reusable adjoint storage for [`Graph::grad_with`].
#[derive(Clone, Debug, Default)]
pub struct GradWorkspace {
    adjoints: Vec<Matrix>,
    has_adjoint: Vec<bool>,
    active: Vec<bool>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn shape(&self, id: NodeId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id.0].op
    }

    pub fn name(&self, id: NodeId) -> Option<&str> {
        self.nodes[id.0].name.as_deref()
    }

    fn push(&mut self, op: Op, rows: usize, cols: usize) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node { op, rows, cols, name: None, constant: None });
        id
    }

    fn check(&self, id: NodeId) {
        assert!(id.0 < self.nodes.len(), "node {:?} does not belong to this graph", id);
    }

    fn same_shape(&self, op: &str, a: NodeId, b: NodeId) -> (usize, usize) {
        self.check(a);
        self.check(b);
        let (sa, sb) = (self.shape(a), self.shape(b));
        assert_eq!(sa, sb, "{op}: shape mismatch {sa:?} vs {sb:?}");
        sa
    }

    // ---- leaves -------------------------------------------------------------------------

    pub fn input(&mut self, name: &str, rows: usize, cols: usize) -> NodeId {
        let id = self.push(Op::Leaf(LeafKind::Input), rows, cols);
        self.nodes[id.0].name = Some(name.to_string());
        id
    }

    pub fn parameter(&mut self, name: &str, rows: usize, cols: usize) -> NodeId {
        let id = self.push(Op::Leaf(LeafKind::Parameter), rows, cols);
        self.nodes[id.0].name = Some(name.to_string());
        id
    }

    pub fn constant(&mut self, value: Matrix) -> NodeId {
        let (r, c) = value.shape();
        let id = self.push(Op::Leaf(LeafKind::Constant), r, c);
        self.nodes[id.0].constant = Some(value);
        id
    }

    // ---- primitives ---------------------------------------------------------------------
    //
    // Builders panic on shape mismatches: those are construction bugs, not data errors.

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.same_shape("add", a, b);
        self.push(Op::Add(a, b), r, c)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.same_shape("sub", a, b);
        self.push(Op::Sub(a, b), r, c)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.same_shape("mul", a, b);
        self.push(Op::Mul(a, b), r, c)
    }

    pub fn div(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (r, c) = self.same_shape("div", a, b);
        self.push(Op::Div(a, b), r, c)
    }

    pub fn scale_shift(&mut self, arg: NodeId, scale: f64, shift: f64) -> NodeId {
        self.check(arg);
        let (r, c) = self.shape(arg);
        self.push(Op::ScaleShift { arg, scale, shift }, r, c)
    }

    pub fn scale(&mut self, arg: NodeId, scale: f64) -> NodeId {
        self.scale_shift(arg, scale, 0.0)
    }

    pub fn shift(&mut self, arg: NodeId, shift: f64) -> NodeId {
        self.scale_shift(arg, 1.0, shift)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.check(a);
        let (r, c) = self.shape(a);
        self.push(Op::Tanh(a), r, c)
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.check(a);
        let (r, c) = self.shape(a);
        self.push(Op::Exp(a), r, c)
    }

    pub fn square(&mut self, a: NodeId) -> NodeId {
        self.check(a);
        let (r, c) = self.shape(a);
        self.push(Op::Square(a), r, c)
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.check(a);
        let (r, c) = self.shape(a);
        self.push(Op::Abs(a), r, c)
    }

    pub fn affine(&mut self, input: NodeId, weight: NodeId, bias: Option<NodeId>) -> NodeId {
        self.check(input);
        self.check(weight);
        let (n, k) = self.shape(input);
        let (k2, m) = self.shape(weight);
        assert_eq!(k, k2, "affine: input {n}x{k} incompatible with weight {k2}x{m}");
        if let Some(b) = bias {
            self.check(b);
            assert_eq!(self.shape(b), (1, m), "affine: bias must be 1x{m}");
        }
        self.push(Op::Affine { input, weight, bias }, n, m)
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        self.check(a);
        self.push(Op::Sum(a), 1, 1)
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        self.check(a);
        self.push(Op::Mean(a), 1, 1)
    }

    // ---- composites ---------------------------------------------------------------------

    /// Column `col` of an `n × k` node as an `n × 1` node (affine map with a selector).
    pub fn select_column(&mut self, a: NodeId, col: usize) -> NodeId {
        let (_, k) = self.shape(a);
        assert!(col < k, "select_column: column {col} out of range for width {k}");
        let mut sel = Matrix::zeros(k, 1);
        sel.set(col, 0, 1.0);
        let sel = self.constant(sel);
        self.affine(a, sel, None)
    }

    /// Place `n × 1` columns side by side into an `n × k` node.
    pub fn hstack(&mut self, columns: &[NodeId]) -> NodeId {
        assert!(!columns.is_empty(), "hstack of zero columns");
        let k = columns.len();
        let mut acc: Option<NodeId> = None;
        for (j, &c) in columns.iter().enumerate() {
            assert_eq!(self.shape(c).1, 1, "hstack expects n x 1 columns");
            let mut e = Matrix::zeros(1, k);
            e.set(0, j, 1.0);
            let e = self.constant(e);
            let placed = self.affine(c, e, None);
            acc = Some(match acc {
                None => placed,
                Some(prev) => self.add(prev, placed),
            });
        }
        acc.unwrap()
    }

    /// Mean of squares, the per-family loss reduction.
    pub fn mean_square(&mut self, a: NodeId) -> NodeId {
        let sq = self.square(a);
        self.mean(sq)
    }

    // ---- forward ------------------------------------------------------------------------

    pub fn evaluate(&self, bindings: &Bindings) -> Result<Evaluation, AutodiffError> {
        let mut eval = Evaluation::default();
        self.evaluate_into(bindings, &mut eval)?;
        Ok(eval)
    }

    /// Forward pass reusing the buffers of a previous evaluation.
    pub fn evaluate_into(&self, bindings: &Bindings, eval: &mut Evaluation) -> Result<(), AutodiffError> {
        let n = self.nodes.len();
        eval.values.truncate(n);
        while eval.values.len() < n {
            eval.values.push(Matrix::zeros(0, 0));
        }
        self.forward_range(bindings, eval, 0)
    }

    /// Recompute nodes from `from` onwards after their leaves were rebound, keeping the
    /// cached values of earlier nodes.
    pub fn evaluate_from(&self, bindings: &Bindings, eval: &mut Evaluation, from: NodeId) -> Result<(), AutodiffError> {
        if eval.values.len() != self.nodes.len() {
            return Err(AutodiffError::NotEvaluated);
        }
        self.forward_range(bindings, eval, from.0)
    }

    fn forward_range(&self, bindings: &Bindings, eval: &mut Evaluation, start: usize) -> Result<(), AutodiffError> {
        let n = self.nodes.len();
        for i in start..n {
            let node = &self.nodes[i];
            let (before, rest) = eval.values.split_at_mut(i);
            let out = &mut rest[0];
            match node.op {
                Op::Leaf(LeafKind::Constant) => {
                    out.copy_from(node.constant.as_ref().expect("constant without value"));
                }
                Op::Leaf(_) => {
                    let v = bindings.get(NodeId(i)).ok_or_else(|| AutodiffError::UnassignedLeaf {
                        node: NodeId(i),
                        name: node.name.clone().unwrap_or_default(),
                    })?;
                    if v.shape() != (node.rows, node.cols) {
                        return Err(AutodiffError::BindingShape {
                            name: node.name.clone().unwrap_or_default(),
                            expected: (node.rows, node.cols),
                            found: v.shape(),
                        });
                    }
                    out.copy_from(v);
                }
                _ => forward_op(&node.op, node.rows, node.cols, before, out),
            }
        }
        Ok(())
    }

    // ---- reverse ------------------------------------------------------------------------

    /// Gradient of `root` (seeded with adjoint 1 on every entry, i.e. of the sum of `root`)
    /// with respect to each node in `wrt`.
    pub fn grad(&self, eval: &Evaluation, root: NodeId, wrt: &[NodeId]) -> Result<Vec<Matrix>, AutodiffError> {
        let mut ws = GradWorkspace::default();
        self.grad_with(eval, root, wrt, &mut ws)
    }

    pub fn grad_with(
        &self,
        eval: &Evaluation,
        root: NodeId,
        wrt: &[NodeId],
        ws: &mut GradWorkspace,
    ) -> Result<Vec<Matrix>, AutodiffError> {
        let n = self.nodes.len();
        if root.0 >= n {
            return Err(AutodiffError::NotInGraph(root));
        }
        for &w in wrt {
            if w.0 >= n {
                return Err(AutodiffError::NotInGraph(w));
            }
        }
        if eval.values.len() <= root.0 {
            return Err(AutodiffError::NotEvaluated);
        }
        let last = root.0;

        // Forward mark: nodes that depend on a wrt leaf.
        ws.active.clear();
        ws.active.resize(last + 1, false);
        for &w in wrt {
            if w.0 <= last {
                ws.active[w.0] = true;
            }
        }
        for i in 0..=last {
            if ws.active[i] {
                continue;
            }
            let (args, cnt) = self.nodes[i].op.args();
            ws.active[i] = args[..cnt].iter().flatten().any(|a| ws.active[a.0]);
        }

        ws.has_adjoint.clear();
        ws.has_adjoint.resize(last + 1, false);
        while ws.adjoints.len() < last + 1 {
            ws.adjoints.push(Matrix::zeros(0, 0));
        }

        if ws.active[last] {
            let node = &self.nodes[last];
            ws.adjoints[last].reset_shape(node.rows, node.cols);
            ws.adjoints[last].fill(1.0);
            ws.has_adjoint[last] = true;
        }

        for i in (0..=last).rev() {
            if !ws.has_adjoint[i] {
                continue;
            }
            let node = &self.nodes[i];
            let (args, cnt) = node.op.args();
            if cnt == 0 {
                continue;
            }
            // Move the adjoint out so argument adjoints can be borrowed mutably.
            let g = std::mem::replace(&mut ws.adjoints[i], Matrix::zeros(0, 0));
            for (slot, arg) in args[..cnt].iter().enumerate() {
                let Some(arg) = *arg else { continue };
                if !ws.active[arg.0] {
                    continue;
                }
                let arg_node = &self.nodes[arg.0];
                if !ws.has_adjoint[arg.0] {
                    ws.adjoints[arg.0].reset_shape(arg_node.rows, arg_node.cols);
                    ws.adjoints[arg.0].fill(0.0);
                    ws.has_adjoint[arg.0] = true;
                }
                let acc = &mut ws.adjoints[arg.0];
                backward_op(&node.op, slot, &g, eval, NodeId(i), acc);
            }
            ws.adjoints[i] = g;
        }

        Ok(wrt
            .iter()
            .map(|&w| {
                if w.0 <= last && ws.has_adjoint[w.0] {
                    ws.adjoints[w.0].clone()
                } else {
                    let (r, c) = self.shape(w);
                    Matrix::zeros(r, c)
                }
            })
            .collect())
    }

    // ---- input derivatives --------------------------------------------------------------

    /// New node holding `∂output/∂input` row by row, where `input` is an `n × 1` input leaf
    /// and row `i` of `output` depends on row `i` of `input` only. The result is an ordinary
    /// node, so it can be composed further and differentiated again.
    pub fn input_derivative(&mut self, output: NodeId, input: NodeId) -> Result<NodeId, AutodiffError> {
        if output.0 >= self.nodes.len() {
            return Err(AutodiffError::NotInGraph(output));
        }
        if input.0 >= self.nodes.len() {
            return Err(AutodiffError::NotInGraph(input));
        }
        if !matches!(self.nodes[input.0].op, Op::Leaf(LeafKind::Input)) {
            return Err(AutodiffError::NotAnInput(input));
        }
        if self.nodes[input.0].cols != 1 {
            return Err(AutodiffError::Unsupported {
                op: "input",
                reason: "input derivatives are taken with respect to n x 1 columns",
            });
        }
        match self.tangent(output, input)? {
            Some(t) => Ok(t),
            None => {
                let (r, c) = self.shape(output);
                Ok(self.constant(Matrix::zeros(r, c)))
            }
        }
    }

    /// Forward-mode construction: tangent nodes for every ancestor of `output` that depends on
    /// `input`, visited in id (topological) order. `None` means identically zero.
    fn tangent(&mut self, output: NodeId, input: NodeId) -> Result<Option<NodeId>, AutodiffError> {
        if let Some(&t) = self.tangents.get(&(output, input)) {
            return Ok(t);
        }
        // Collect ancestors of `output` that lie downstream of `input`.
        let hi = output.0;
        let mut needed = vec![false; hi + 1];
        needed[hi] = true;
        for i in (0..=hi).rev() {
            if !needed[i] {
                continue;
            }
            let (args, cnt) = self.nodes[i].op.args();
            for a in args[..cnt].iter().flatten() {
                needed[a.0] = true;
            }
        }
        let mut depends = vec![false; hi + 1];
        for i in 0..=hi {
            if i == input.0 {
                depends[i] = true;
                continue;
            }
            let (args, cnt) = self.nodes[i].op.args();
            depends[i] = args[..cnt].iter().flatten().any(|a| depends[a.0]);
        }

        let n_rows = self.nodes[input.0].rows;
        for i in 0..=hi {
            if !needed[i] || self.tangents.contains_key(&(NodeId(i), input)) {
                continue;
            }
            let id = NodeId(i);
            let t = if !depends[i] {
                None
            } else {
                if self.nodes[i].rows != n_rows {
                    return Err(AutodiffError::Unsupported {
                        op: self.nodes[i].op.kind_name(),
                        reason: "node is not row-aligned with the input column",
                    });
                }
                self.tangent_rule(id, input)?
            };
            self.tangents.insert((id, input), t);
        }
        Ok(self.tangents[&(output, input)])
    }

    fn known_tangent(&self, id: NodeId, input: NodeId) -> Option<NodeId> {
        self.tangents.get(&(id, input)).copied().flatten()
    }

    fn tangent_rule(&mut self, id: NodeId, input: NodeId) -> Result<Option<NodeId>, AutodiffError> {
        let op = self.nodes[id.0].op.clone();
        let t = |g: &Graph, a: NodeId| g.known_tangent(a, input);
        let out = match op {
            Op::Leaf(_) => {
                // Only the input itself reaches here (other leaves never depend on it).
                let (r, c) = self.shape(id);
                Some(self.constant(Matrix::filled(r, c, 1.0)))
            }
            Op::Add(a, b) => match (t(self, a), t(self, b)) {
                (Some(ta), Some(tb)) => Some(self.add(ta, tb)),
                (Some(ta), None) => Some(ta),
                (None, Some(tb)) => Some(tb),
                (None, None) => None,
            },
            Op::Sub(a, b) => match (t(self, a), t(self, b)) {
                (Some(ta), Some(tb)) => Some(self.sub(ta, tb)),
                (Some(ta), None) => Some(ta),
                (None, Some(tb)) => Some(self.scale(tb, -1.0)),
                (None, None) => None,
            },
            Op::Mul(a, b) => {
                let l = t(self, a).map(|ta| self.mul(ta, b));
                let r = t(self, b).map(|tb| self.mul(a, tb));
                match (l, r) {
                    (Some(l), Some(r)) => Some(self.add(l, r)),
                    (l, r) => l.or(r),
                }
            }
            Op::Div(a, b) => {
                // d(a/b) = (da - (a/b)·db) / b
                let num = match (t(self, a), t(self, b)) {
                    (Some(ta), Some(tb)) => {
                        let q = self.mul(id, tb);
                        Some(self.sub(ta, q))
                    }
                    (Some(ta), None) => Some(ta),
                    (None, Some(tb)) => {
                        let q = self.mul(id, tb);
                        Some(self.scale(q, -1.0))
                    }
                    (None, None) => None,
                };
                num.map(|n| self.div(n, b))
            }
            Op::ScaleShift { arg, scale, .. } => t(self, arg).map(|ta| self.scale(ta, scale)),
            Op::Tanh(a) => match t(self, a) {
                Some(ta) => {
                    let slope = self.tanh_slope(id);
                    Some(self.mul(slope, ta))
                }
                None => None,
            },
            Op::Exp(a) => t(self, a).map(|ta| self.mul(id, ta)),
            Op::Square(a) => t(self, a).map(|ta| {
                let two_a = self.scale(a, 2.0);
                self.mul(two_a, ta)
            }),
            Op::Abs(_) => {
                return Err(AutodiffError::Unsupported { op: "abs", reason: "not differentiable at zero" });
            }
            Op::Affine { input: x, weight, bias } => {
                if t(self, weight).is_some() || bias.and_then(|b| t(self, b)).is_some() {
                    return Err(AutodiffError::Unsupported {
                        op: "affine",
                        reason: "weights or bias depend on the differentiation input",
                    });
                }
                t(self, x).map(|tx| self.affine(tx, weight, None))
            }
            Op::Sum(_) | Op::Mean(_) => {
                return Err(AutodiffError::Unsupported {
                    op: op.kind_name(),
                    reason: "reductions mix rows belonging to different points",
                });
            }
        };
        Ok(out)
    }

    /// `1 - tanh²`, shared by every direction differentiated through the same tanh node.
    fn tanh_slope(&mut self, tanh_node: NodeId) -> NodeId {
        if let Some(&s) = self.tanh_slopes.get(&tanh_node) {
            return s;
        }
        let sq = self.square(tanh_node);
        let s = self.scale_shift(sq, -1.0, 1.0);
        self.tanh_slopes.insert(tanh_node, s);
        s
    }
}

fn forward_op(op: &Op, rows: usize, cols: usize, vals: &[Matrix], out: &mut Matrix) {
    out.reset_shape(rows, cols);
    let o = out.as_mut_slice();
    match *op {
        Op::Leaf(_) => unreachable!(),
        Op::Add(a, b) => zip2(o, &vals[a.0], &vals[b.0], |x, y| x + y),
        Op::Sub(a, b) => zip2(o, &vals[a.0], &vals[b.0], |x, y| x - y),
        Op::Mul(a, b) => zip2(o, &vals[a.0], &vals[b.0], |x, y| x * y),
        Op::Div(a, b) => zip2(o, &vals[a.0], &vals[b.0], |x, y| x / y),
        Op::ScaleShift { arg, scale, shift } => map1(o, &vals[arg.0], |x| scale * x + shift),
        Op::Tanh(a) => map1(o, &vals[a.0], f64::tanh),
        Op::Exp(a) => map1(o, &vals[a.0], f64::exp),
        Op::Square(a) => map1(o, &vals[a.0], |x| x * x),
        Op::Abs(a) => map1(o, &vals[a.0], f64::abs),
        Op::Affine { input, weight, bias } => {
            let x = &vals[input.0];
            let w = &vals[weight.0];
            let (n, k) = x.shape();
            let m = w.cols();
            match bias {
                Some(b) => {
                    let b = vals[b.0].as_slice();
                    for row in o.chunks_exact_mut(m) {
                        row.copy_from_slice(b);
                    }
                    gemm(n, k, m, 1.0, x.as_slice(), (k as isize, 1), w.as_slice(), (m as isize, 1), 1.0, o);
                }
                None => {
                    gemm(n, k, m, 1.0, x.as_slice(), (k as isize, 1), w.as_slice(), (m as isize, 1), 0.0, o);
                }
            }
        }
        Op::Sum(a) => o[0] = vals[a.0].as_slice().iter().sum(),
        Op::Mean(a) => {
            let v = vals[a.0].as_slice();
            o[0] = if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        }
    }
}

#[inline]
fn zip2(o: &mut [f64], a: &Matrix, b: &Matrix, f: impl Fn(f64, f64) -> f64) {
    for ((o, &x), &y) in o.iter_mut().zip(a.as_slice()).zip(b.as_slice()) {
        *o = f(x, y);
    }
}

#[inline]
fn map1(o: &mut [f64], a: &Matrix, f: impl Fn(f64) -> f64) {
    for (o, &x) in o.iter_mut().zip(a.as_slice()) {
        *o = f(x);
    }
}

/// Accumulate into `acc` the contribution of node `id` (with adjoint `g`) to argument `slot`.
fn backward_op(op: &Op, slot: usize, g: &Matrix, eval: &Evaluation, id: NodeId, acc: &mut Matrix) {
    let vals = &eval.values;
    let a_out = acc.as_mut_slice();
    let gs = g.as_slice();
    match *op {
        Op::Leaf(_) => {}
        Op::Add(..) => axpy(a_out, gs, 1.0),
        Op::Sub(..) => axpy(a_out, gs, if slot == 0 { 1.0 } else { -1.0 }),
        Op::Mul(a, b) => {
            let other = if slot == 0 { &vals[b.0] } else { &vals[a.0] };
            for ((o, &g), &v) in a_out.iter_mut().zip(gs).zip(other.as_slice()) {
                *o += g * v;
            }
        }
        Op::Div(_, b) => {
            let bv = vals[b.0].as_slice();
            if slot == 0 {
                for ((o, &g), &d) in a_out.iter_mut().zip(gs).zip(bv) {
                    *o += g / d;
                }
            } else {
                let y = vals[id.0].as_slice();
                for (((o, &g), &d), &q) in a_out.iter_mut().zip(gs).zip(bv).zip(y) {
                    *o -= g * q / d;
                }
            }
        }
        Op::ScaleShift { scale, .. } => axpy(a_out, gs, scale),
        Op::Tanh(_) => {
            let y = vals[id.0].as_slice();
            for ((o, &g), &t) in a_out.iter_mut().zip(gs).zip(y) {
                *o += g * (1.0 - t * t);
            }
        }
        Op::Exp(_) => {
            let y = vals[id.0].as_slice();
            for ((o, &g), &e) in a_out.iter_mut().zip(gs).zip(y) {
                *o += g * e;
            }
        }
        Op::Square(a) => {
            let x = vals[a.0].as_slice();
            for ((o, &g), &v) in a_out.iter_mut().zip(gs).zip(x) {
                *o += 2.0 * g * v;
            }
        }
        Op::Abs(a) => {
            let x = vals[a.0].as_slice();
            for ((o, &g), &v) in a_out.iter_mut().zip(gs).zip(x) {
                let s = if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                *o += g * s;
            }
        }
        Op::Affine { input, weight, .. } => {
            let x = &vals[input.0];
            let w = &vals[weight.0];
            let (n, k) = x.shape();
            let m = w.cols();
            match slot {
                // dX += G · Wᵀ
                0 => gemm(n, m, k, 1.0, gs, (m as isize, 1), w.as_slice(), (1, m as isize), 1.0, a_out),
                // dW += Xᵀ · G
                1 => gemm(k, n, m, 1.0, x.as_slice(), (1, k as isize), gs, (m as isize, 1), 1.0, a_out),
                // db += column sums of G
                _ => {
                    for row in gs.chunks_exact(m) {
                        for (o, &g) in a_out.iter_mut().zip(row) {
                            *o += g;
                        }
                    }
                }
            }
        }
        Op::Sum(_) => {
            let g0 = gs[0];
            a_out.iter_mut().for_each(|o| *o += g0);
        }
        Op::Mean(_) => {
            let len = a_out.len();
            if len > 0 {
                let g0 = gs[0] / len as f64;
                a_out.iter_mut().for_each(|o| *o += g0);
            }
        }
    }
}

#[inline]
fn axpy(o: &mut [f64], g: &[f64], alpha: f64) {
    for (o, &g) in o.iter_mut().zip(g) {
        *o += alpha * g;
    }
}
