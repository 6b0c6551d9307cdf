//! A reverse-mode autodiff tape over dense f64 vectors and matrices.

use super::params::{Grads, ParamStore};

/// Handle to a tape value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Constant,
    Param(usize),
    Row(usize, usize),
    MatVec(Var, Var),
    MatTVec(Var, Var),
    Add(Var, Var),
    Mul(Var, Var),
    Tanh(Var),
    Sigmoid(Var),
    OneMinus(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    StackRows(Vec<Var>),
    Gather(Var, Vec<usize>),
    Softmax(Var),
    Dot(Var, Var),
    Sum(Var),
    Log(Var),
    NegLog(Var),
    Nll(Var, usize),
    Bce(Var, bool),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    rows: usize,
    cols: usize,
    op: Op,
}

/// Records one forward computation. Parameters are read from a
/// [`ParamStore`] and their gradients written to a [`Grads`].
pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
    param_nodes: Vec<Option<Var>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Tape { params, nodes: Vec::new(), param_nodes: vec![None; params.len()] }
    }

    pub fn params(&self) -> &'p ParamStore {
        self.params
    }

    fn push(&mut self, value: Vec<f64>, rows: usize, cols: usize, op: Op) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node { value, rows, cols, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn len(&self, v: Var) -> usize {
        self.nodes[v.0].value.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn constant(&mut self, value: Vec<f64>) -> Var {
        let n = value.len();
        self.push(value, n, 1, Op::Constant)
    }

    pub fn zeros(&mut self, n: usize) -> Var {
        self.constant(vec![0.0; n])
    }

    /// A whole parameter block; repeated calls share one tape node.
    pub fn param(&mut self, id: usize) -> Var {
        if let Some(v) = self.param_nodes[id] {
            return v;
        }
        let (rows, cols) = self.params.shape(id);
        let v = self.push(self.params.values(id).to_vec(), rows, cols, Op::Param(id));
        self.param_nodes[id] = Some(v);
        v
    }

    /// One row of a parameter matrix, as a vector.
    pub fn row(&mut self, id: usize, row: usize) -> Var {
        let (rows, cols) = self.params.shape(id);
        assert!(row < rows, "row {row} out of range for {}", self.params.name(id));
        let value = self.params.values(id)[row * cols..(row + 1) * cols].to_vec();
        self.push(value, cols, 1, Op::Row(id, row))
    }

    pub fn matvec(&mut self, m: Var, x: Var) -> Var {
        let (mn, xn) = (&self.nodes[m.0], &self.nodes[x.0]);
        assert_eq!(mn.cols, xn.value.len(), "matvec shape");
        let out: Vec<f64> = mn.value.chunks(mn.cols).map(|r| r.iter().zip(&xn.value).map(|(a, b)| a * b).sum()).collect();
        let n = out.len();
        self.push(out, n, 1, Op::MatVec(m, x))
    }

    /// `mᵀ x`.
    pub fn mattvec(&mut self, m: Var, x: Var) -> Var {
        let (mn, xn) = (&self.nodes[m.0], &self.nodes[x.0]);
        assert_eq!(mn.rows, xn.value.len(), "mattvec shape");
        let mut out = vec![0.0; mn.cols];
        for (r, &w) in mn.value.chunks(mn.cols).zip(&xn.value) {
            for (o, a) in out.iter_mut().zip(r) {
                *o += a * w;
            }
        }
        let n = out.len();
        self.push(out, n, 1, Op::MatTVec(m, x))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().zip(&self.nodes[b.0].value).map(|(x, y)| x + y).collect();
        assert_eq!(out.len(), self.len(a), "add shape");
        let n = out.len();
        self.push(out, n, 1, Op::Add(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().zip(&self.nodes[b.0].value).map(|(x, y)| x * y).collect();
        assert_eq!(out.len(), self.len(a), "mul shape");
        let n = out.len();
        self.push(out, n, 1, Op::Mul(a, b))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().map(|x| x.tanh()).collect();
        let n = out.len();
        self.push(out, n, 1, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().map(|&x| sigmoid(x)).collect();
        let n = out.len();
        self.push(out, n, 1, Op::Sigmoid(a))
    }

    pub fn one_minus(&mut self, a: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().map(|x| 1.0 - x).collect();
        let n = out.len();
        self.push(out, n, 1, Op::OneMinus(a))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let out: Vec<f64> = parts.iter().flat_map(|p| self.nodes[p.0].value.iter().copied()).collect();
        let n = out.len();
        self.push(out, n, 1, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Var {
        let out = self.nodes[a.0].value[start..start + len].to_vec();
        self.push(out, len, 1, Op::Slice(a, start))
    }

    /// Vectors of equal length as the rows of a matrix.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Var {
        assert!(!rows.is_empty(), "stack_rows of nothing");
        let cols = self.len(rows[0]);
        let out: Vec<f64> = rows.iter().flat_map(|r| self.nodes[r.0].value.iter().copied()).collect();
        assert_eq!(out.len(), rows.len() * cols, "stack_rows shape");
        self.push(out, rows.len(), cols, Op::StackRows(rows.to_vec()))
    }

    pub fn gather(&mut self, a: Var, indices: &[usize]) -> Var {
        let out: Vec<f64> = indices.iter().map(|&i| self.nodes[a.0].value[i]).collect();
        let n = out.len();
        self.push(out, n, 1, Op::Gather(a, indices.to_vec()))
    }

    pub fn softmax(&mut self, a: Var) -> Var {
        let out = softmax(&self.nodes[a.0].value);
        let n = out.len();
        self.push(out, n, 1, Op::Softmax(a))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Var {
        let v = self.nodes[a.0].value.iter().zip(&self.nodes[b.0].value).map(|(x, y)| x * y).sum();
        self.push(vec![v], 1, 1, Op::Dot(a, b))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = self.nodes[a.0].value.iter().sum();
        self.push(vec![v], 1, 1, Op::Sum(a))
    }

    pub fn log(&mut self, a: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().map(|x| x.ln()).collect();
        let n = out.len();
        self.push(out, n, 1, Op::Log(a))
    }

    pub fn neg_log(&mut self, a: Var) -> Var {
        let out: Vec<f64> = self.nodes[a.0].value.iter().map(|x| -x.ln()).collect();
        let n = out.len();
        self.push(out, n, 1, Op::NegLog(a))
    }

    /// `-log softmax(logits)[target]`.
    pub fn nll(&mut self, logits: Var, target: usize) -> Var {
        let xs = &self.nodes[logits.0].value;
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        let v = lse - xs[target];
        self.push(vec![v], 1, 1, Op::Nll(logits, target))
    }

    /// `-log σ(z)` for a true target, `-log(1 - σ(z))` otherwise.
    pub fn bce(&mut self, z: Var, target: bool) -> Var {
        let x = self.scalar(z);
        let signed = if target { x } else { -x };
        let v = (-signed).max(0.0) + (-signed.abs()).exp().ln_1p();
        self.push(vec![v], 1, 1, Op::Bce(z, target))
    }

    /// Sum of scalar vars.
    pub fn total(&mut self, terms: &[Var]) -> Var {
        let c = self.concat(terms);
        self.sum(c)
    }

    /// Back-propagates from scalar `out`, adding into `grads`.
    pub fn backward(&self, out: Var, grads: &mut Grads) {
        let mut g: Vec<Option<Vec<f64>>> = vec![None; out.0 + 1];
        g[out.0] = Some(vec![1.0]);
        fn acc(g: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut Vec<f64> {
            g[v.0].get_or_insert_with(|| vec![0.0; len])
        }
        for i in (0..=out.0).rev() {
            let Some(grad) = g[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Constant => {}
                Op::Param(id) => {
                    for (d, x) in grads.values_mut(*id).iter_mut().zip(&grad) {
                        *d += x;
                    }
                }
                Op::Row(id, row) => {
                    let cols = node.value.len();
                    for (d, x) in grads.values_mut(*id)[row * cols..(row + 1) * cols].iter_mut().zip(&grad) {
                        *d += x;
                    }
                }
                Op::MatVec(m, x) => {
                    let (mn, xn) = (&self.nodes[m.0], &self.nodes[x.0]);
                    let cols = mn.cols;
                    {
                        let gm = acc(&mut g, *m, mn.value.len());
                        for (r, &gr) in grad.iter().enumerate() {
                            for (c, &xv) in xn.value.iter().enumerate() {
                                gm[r * cols + c] += gr * xv;
                            }
                        }
                    }
                    let gx = acc(&mut g, *x, cols);
                    for (r, &gr) in grad.iter().enumerate() {
                        for (c, d) in gx.iter_mut().enumerate() {
                            *d += gr * mn.value[r * cols + c];
                        }
                    }
                }
                Op::MatTVec(m, x) => {
                    let (mn, xn) = (&self.nodes[m.0], &self.nodes[x.0]);
                    let cols = mn.cols;
                    {
                        let gm = acc(&mut g, *m, mn.value.len());
                        for (r, &xv) in xn.value.iter().enumerate() {
                            for (c, &gc) in grad.iter().enumerate() {
                                gm[r * cols + c] += xv * gc;
                            }
                        }
                    }
                    let gx = acc(&mut g, *x, mn.rows);
                    for (r, d) in gx.iter_mut().enumerate() {
                        *d += mn.value[r * cols..(r + 1) * cols].iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                Op::Add(a, b) => {
                    for v in [*a, *b] {
                        for (d, x) in acc(&mut g, v, grad.len()).iter_mut().zip(&grad) {
                            *d += x;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    for (d, (x, y)) in acc(&mut g, *a, grad.len()).iter_mut().zip(grad.iter().zip(bv)) {
                        *d += x * y;
                    }
                    for (d, (x, y)) in acc(&mut g, *b, grad.len()).iter_mut().zip(grad.iter().zip(av)) {
                        *d += x * y;
                    }
                }
                Op::Tanh(a) => {
                    for (d, (x, y)) in acc(&mut g, *a, grad.len()).iter_mut().zip(grad.iter().zip(&node.value)) {
                        *d += x * (1.0 - y * y);
                    }
                }
                Op::Sigmoid(a) => {
                    for (d, (x, y)) in acc(&mut g, *a, grad.len()).iter_mut().zip(grad.iter().zip(&node.value)) {
                        *d += x * y * (1.0 - y);
                    }
                }
                Op::OneMinus(a) => {
                    for (d, x) in acc(&mut g, *a, grad.len()).iter_mut().zip(&grad) {
                        *d -= x;
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        for (d, x) in acc(&mut g, *p, n).iter_mut().zip(&grad[off..off + n]) {
                            *d += x;
                        }
                        off += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.nodes[a.0].value.len();
                    for (d, x) in acc(&mut g, *a, n)[*start..].iter_mut().zip(&grad) {
                        *d += x;
                    }
                }
                Op::StackRows(rows) => {
                    let cols = node.cols;
                    for (r, v) in rows.iter().enumerate() {
                        for (d, x) in acc(&mut g, *v, cols).iter_mut().zip(&grad[r * cols..(r + 1) * cols]) {
                            *d += x;
                        }
                    }
                }
                Op::Gather(a, idx) => {
                    let n = self.nodes[a.0].value.len();
                    let ga = acc(&mut g, *a, n);
                    for (&i, x) in idx.iter().zip(&grad) {
                        ga[i] += x;
                    }
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let inner: f64 = grad.iter().zip(y).map(|(x, y)| x * y).sum();
                    for (d, (x, yi)) in acc(&mut g, *a, y.len()).iter_mut().zip(grad.iter().zip(y)) {
                        *d += yi * (x - inner);
                    }
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                    for (d, y) in acc(&mut g, *a, av.len()).iter_mut().zip(bv) {
                        *d += grad[0] * y;
                    }
                    for (d, x) in acc(&mut g, *b, bv.len()).iter_mut().zip(av) {
                        *d += grad[0] * x;
                    }
                }
                Op::Sum(a) => {
                    let n = self.nodes[a.0].value.len();
                    for d in acc(&mut g, *a, n).iter_mut() {
                        *d += grad[0];
                    }
                }
                Op::Log(a) => {
                    let av = &self.nodes[a.0].value;
                    for (d, (x, y)) in acc(&mut g, *a, av.len()).iter_mut().zip(grad.iter().zip(av)) {
                        *d += x / y;
                    }
                }
                Op::NegLog(a) => {
                    let av = &self.nodes[a.0].value;
                    for (d, (x, y)) in acc(&mut g, *a, av.len()).iter_mut().zip(grad.iter().zip(av)) {
                        *d -= x / y;
                    }
                }
                Op::Nll(a, target) => {
                    let p = softmax(&self.nodes[a.0].value);
                    let ga = acc(&mut g, *a, p.len());
                    for (k, (d, pk)) in ga.iter_mut().zip(&p).enumerate() {
                        *d += grad[0] * (pk - if k == *target { 1.0 } else { 0.0 });
                    }
                }
                Op::Bce(a, target) => {
                    let s = sigmoid(self.nodes[a.0].value[0]);
                    let t = if *target { 1.0 } else { 0.0 };
                    acc(&mut g, *a, 1)[0] += grad[0] * (s - t);
                }
            }
        }
    }
}

pub(crate) fn softmax_values(xs: &[f64]) -> Vec<f64> {
    softmax(xs)
}
