//! Reverse-mode tape over vector-valued nodes.
//!
//! Every node holds a flat `Vec<f64>`. Parameters are read from a borrowed
//! [`ParamStore`]; `backward` returns their gradients as a [`Gradients`]
//! value so that several tapes can run in parallel against the same store.

use super::tensor::{GradEntry, Gradients, ParamId, ParamStore};
use crate::error::{Error, Result};

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param(ParamId),
    Row(ParamId, usize),
    MatVec(ParamId, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Affine(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Concat(Vec<Var>),
    Slice(Var, usize),
    Softmax(Var),
    WeightedSum(Var, Vec<Var>),
    Pick(Var, Vec<usize>),
    LnFloor(Var, f64),
    Mean(Vec<Var>),
}

#[derive(Debug)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

pub struct Graph<'a> {
    params: &'a ParamStore,
    nodes: Vec<Node>,
}

impl<'a> Graph<'a> {
    pub fn new(params: &'a ParamStore) -> Self {
        Graph { params, nodes: Vec::with_capacity(1024) }
    }

    pub fn params(&self) -> &'a ParamStore {
        self.params
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn dim(&self, v: Var) -> usize {
        self.nodes[v.0].value.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn input(&mut self, values: Vec<f64>) -> Var {
        self.push(values, Op::Input)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        let value = self.params.get(id).data().to_vec();
        self.push(value, Op::Param(id))
    }

    /// Looks up one row of a matrix parameter (embedding lookup).
    pub fn row(&mut self, id: ParamId, index: usize) -> Result<Var> {
        let table = self.params.get(id);
        if index >= table.rows() {
            return Err(Error::IndexOutOfRange { index, len: table.rows() });
        }
        let value = table.row(index).to_vec();
        Ok(self.push(value, Op::Row(id, index)))
    }

    pub fn matvec(&mut self, id: ParamId, x: Var) -> Result<Var> {
        let w = self.params.get(id);
        let (rows, cols) = (w.rows(), w.cols());
        let xv = self.value(x);
        if xv.len() != cols || w.shape().len() != 2 {
            return Err(Error::Shape(format!(
                "{} is {:?}, input has {} values",
                self.params.name(id),
                w.shape(),
                xv.len()
            )));
        }
        let data = w.data();
        let value = (0..rows).map(|r| dot(&data[r * cols..(r + 1) * cols], xv)).collect();
        Ok(self.push(value, Op::MatVec(id, x)))
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.len() != bv.len() {
            return Err(Error::Shape(format!("elementwise op on {} vs {}", av.len(), bv.len())));
        }
        let value = av.iter().zip(bv).map(|(x, y)| f(*x, *y)).collect();
        Ok(self.push(value, op))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |x, y| x / y, Op::Div(a, b))
    }

    /// `scale * a + shift`, elementwise.
    pub fn affine(&mut self, a: Var, scale: f64, shift: f64) -> Var {
        let value = self.value(a).iter().map(|x| scale * x + shift).collect();
        self.push(value, Op::Affine(a, scale))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).iter().map(|&x| sigmoid(x)).collect();
        self.push(value, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).iter().map(|x| x.tanh()).collect();
        self.push(value, Op::Tanh(a))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let value = parts.iter().flat_map(|p| self.value(*p).iter().copied()).collect();
        self.push(value, Op::Concat(parts.to_vec()))
    }

    pub fn slice(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let av = self.value(a);
        if start + len > av.len() {
            return Err(Error::Shape(format!("slice {start}+{len} of {}", av.len())));
        }
        let value = av[start..start + len].to_vec();
        Ok(self.push(value, Op::Slice(a, start)))
    }

    pub fn softmax(&mut self, a: Var) -> Var {
        let value = softmax(self.value(a));
        self.push(value, Op::Softmax(a))
    }

    /// `sum_i weights[i] * rows[i]`.
    pub fn weighted_sum(&mut self, weights: Var, rows: &[Var]) -> Result<Var> {
        let w = self.value(weights);
        if w.len() != rows.len() || rows.is_empty() {
            return Err(Error::Shape(format!("{} weights for {} rows", w.len(), rows.len())));
        }
        let width = self.dim(rows[0]);
        let mut value = vec![0.0; width];
        for (wi, r) in w.iter().zip(rows) {
            let rv = self.value(*r);
            if rv.len() != width {
                return Err(Error::Shape("ragged rows in weighted sum".into()));
            }
            for (o, x) in value.iter_mut().zip(rv) {
                *o += wi * x;
            }
        }
        Ok(self.push(value, Op::WeightedSum(weights, rows.to_vec())))
    }

    /// Scalar sum of the selected entries (indices may repeat).
    pub fn pick(&mut self, a: Var, indices: &[usize]) -> Result<Var> {
        let av = self.value(a);
        if let Some(&bad) = indices.iter().find(|&&i| i >= av.len()) {
            return Err(Error::IndexOutOfRange { index: bad, len: av.len() });
        }
        let value = vec![indices.iter().map(|&i| av[i]).sum()];
        Ok(self.push(value, Op::Pick(a, indices.to_vec())))
    }

    /// `ln(max(a, floor))`; below the floor the gradient is zero.
    pub fn ln_floor(&mut self, a: Var, floor: f64) -> Var {
        let value = self.value(a).iter().map(|&x| x.max(floor).ln()).collect();
        self.push(value, Op::LnFloor(a, floor))
    }

    pub fn mean(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Shape("mean of nothing".into()));
        }
        let width = self.dim(parts[0]);
        let mut value = vec![0.0; width];
        for p in parts {
            let pv = self.value(*p);
            if pv.len() != width {
                return Err(Error::Shape("ragged mean".into()));
            }
            for (o, x) in value.iter_mut().zip(pv) {
                *o += x / parts.len() as f64;
            }
        }
        Ok(self.push(value, Op::Mean(parts.to_vec())))
    }

    /// Back-propagates from a scalar node.
    pub fn backward(&self, loss: Var) -> Gradients {
        let mut grads = Gradients::with_len(self.params.len());
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![1.0; self.dim(loss)]);

        fn acc(adj: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut Vec<f64> {
            adj[v.0].get_or_insert_with(|| vec![0.0; len])
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::Param(id) => {
                    let dst = grads.dense_mut(*id, g.len());
                    add_into(dst, &g);
                }
                Op::Row(id, r) => {
                    let dst = grads.row_mut(*id, *r, g.len());
                    add_into(dst, &g);
                }
                Op::MatVec(id, x) => {
                    let w = self.params.get(*id);
                    let cols = w.cols();
                    let data = w.data();
                    let xv = self.value(*x);
                    {
                        let gw = grads.dense_mut(*id, data.len());
                        for (r, gr) in g.iter().enumerate() {
                            if *gr == 0.0 {
                                continue;
                            }
                            for (d, xc) in gw[r * cols..(r + 1) * cols].iter_mut().zip(xv) {
                                *d += gr * xc;
                            }
                        }
                    }
                    let gx = acc(&mut adj, *x, cols);
                    for (r, gr) in g.iter().enumerate() {
                        if *gr == 0.0 {
                            continue;
                        }
                        for (d, wc) in gx.iter_mut().zip(&data[r * cols..(r + 1) * cols]) {
                            *d += gr * wc;
                        }
                    }
                }
                Op::Add(a, b) => {
                    add_into(acc(&mut adj, *a, g.len()), &g);
                    add_into(acc(&mut adj, *b, g.len()), &g);
                }
                Op::Sub(a, b) => {
                    add_into(acc(&mut adj, *a, g.len()), &g);
                    let gb = acc(&mut adj, *b, g.len());
                    for (d, x) in gb.iter_mut().zip(&g) {
                        *d -= x;
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let ga = acc(&mut adj, *a, g.len());
                    for ((d, x), y) in ga.iter_mut().zip(&g).zip(bv) {
                        *d += x * y;
                    }
                    let gb = acc(&mut adj, *b, g.len());
                    for ((d, x), y) in gb.iter_mut().zip(&g).zip(av) {
                        *d += x * y;
                    }
                }
                Op::Div(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    let ga = acc(&mut adj, *a, g.len());
                    for ((d, x), y) in ga.iter_mut().zip(&g).zip(bv) {
                        *d += x / y;
                    }
                    let gb = acc(&mut adj, *b, g.len());
                    for (((d, x), u), y) in gb.iter_mut().zip(&g).zip(av).zip(bv) {
                        *d -= x * u / (y * y);
                    }
                }
                Op::Affine(a, scale) => {
                    let ga = acc(&mut adj, *a, g.len());
                    for (d, x) in ga.iter_mut().zip(&g) {
                        *d += scale * x;
                    }
                }
                Op::Sigmoid(a) => {
                    let ga = acc(&mut adj, *a, g.len());
                    for ((d, x), s) in ga.iter_mut().zip(&g).zip(&node.value) {
                        *d += x * s * (1.0 - s);
                    }
                }
                Op::Tanh(a) => {
                    let ga = acc(&mut adj, *a, g.len());
                    for ((d, x), t) in ga.iter_mut().zip(&g).zip(&node.value) {
                        *d += x * (1.0 - t * t);
                    }
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.dim(*p);
                        add_into(acc(&mut adj, *p, n), &g[offset..offset + n]);
                        offset += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.dim(*a);
                    let ga = acc(&mut adj, *a, n);
                    add_into(&mut ga[*start..*start + g.len()], &g);
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let inner: f64 = g.iter().zip(y).map(|(x, p)| x * p).sum();
                    let ga = acc(&mut adj, *a, g.len());
                    for ((d, x), p) in ga.iter_mut().zip(&g).zip(y) {
                        *d += p * (x - inner);
                    }
                }
                Op::WeightedSum(w, rows) => {
                    let wv = self.value(*w).to_vec();
                    let dots: Vec<f64> = rows.iter().map(|r| dot(self.value(*r), &g)).collect();
                    add_into(acc(&mut adj, *w, wv.len()), &dots);
                    for (wi, r) in wv.iter().zip(rows) {
                        let gr = acc(&mut adj, *r, g.len());
                        for (d, x) in gr.iter_mut().zip(&g) {
                            *d += wi * x;
                        }
                    }
                }
                Op::Pick(a, indices) => {
                    let n = self.dim(*a);
                    let ga = acc(&mut adj, *a, n);
                    for &j in indices {
                        ga[j] += g[0];
                    }
                }
                Op::LnFloor(a, floor) => {
                    let av = self.value(*a);
                    let ga = acc(&mut adj, *a, g.len());
                    for ((d, x), u) in ga.iter_mut().zip(&g).zip(av) {
                        if *u > *floor {
                            *d += x / u;
                        }
                    }
                }
                Op::Mean(parts) => {
                    let k = parts.len() as f64;
                    for p in parts {
                        let gp = acc(&mut adj, *p, g.len());
                        for (d, x) in gp.iter_mut().zip(&g) {
                            *d += x / k;
                        }
                    }
                }
            }
        }
        // Drop empty row maps so callers see untouched params as absent.
        for e in grads.entries.iter_mut() {
            if matches!(e, Some(GradEntry::Rows(m)) if m.is_empty()) {
                *e = None;
            }
        }
        grads
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-subtracted softmax.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}
