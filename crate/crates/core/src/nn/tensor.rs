use rand::Rng;

use crate::error::{Error, Result};

/// Dense row-major float64 tensor with an optional gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Option<Vec<f64>>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!("shape {shape:?} needs {expected} values, got {}", data.len())));
        }
        Ok(Tensor { shape, data, grad: None })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![0.0; n], grad: None }
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![value; n], grad: None }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor { shape: vec![data.len()], data, grad: None }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    pub fn uniform<R: Rng + ?Sized>(shape: Vec<usize>, scale: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        Tensor { shape, data, grad: None }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Width of a row; 1 for vectors.
    pub fn cols(&self) -> usize {
        match self.shape.len() {
            0 | 1 => 1,
            _ => self.shape[1..].iter().product(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn grad_mut(&mut self) -> &mut [f64] {
        let n = self.data.len();
        self.grad.get_or_insert_with(|| vec![0.0; n])
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub(crate) fn data_and_grad_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        let n = self.data.len();
        let grad = self.grad.get_or_insert_with(|| vec![0.0; n]);
        (&mut self.data, grad)
    }
}

/// Identifies a parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named collection of trainable tensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, tensor: Tensor) -> ParamId {
        let name = name.into();
        assert!(!self.names.contains(&name), "duplicate parameter name {name}");
        self.names.push(name);
        self.tensors.push(tensor);
        ParamId(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.id_of(name).map(|id| self.get(id))
    }

    pub fn by_name_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.id_of(name).map(|id| &mut self.tensors[id.0])
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(self.tensors.iter())
    }

    pub(crate) fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.tensors.iter_mut()
    }

    pub fn zero_grads(&mut self) {
        self.tensors.iter_mut().for_each(Tensor::zero_grad);
    }

    /// Adds `scale * grads` into each tensor's accumulator.
    pub fn accumulate(&mut self, grads: &Gradients, scale: f64) {
        for (i, entry) in grads.entries.iter().enumerate() {
            let Some(entry) = entry else { continue };
            let tensor = &mut self.tensors[i];
            let cols = tensor.cols();
            let acc = tensor.grad_mut();
            match entry {
                GradEntry::Dense(g) => {
                    for (a, v) in acc.iter_mut().zip(g) {
                        *a += scale * v;
                    }
                }
                GradEntry::Rows(rows) => {
                    for (&r, g) in rows {
                        for (a, v) in acc[r * cols..(r + 1) * cols].iter_mut().zip(g) {
                            *a += scale * v;
                        }
                    }
                }
            }
        }
    }

    /// Global L2 norm over all populated gradient accumulators.
    pub fn grad_norm(&self) -> f64 {
        self.tensors.iter().filter_map(Tensor::grad).flat_map(|g| g.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum GradEntry {
    Dense(Vec<f64>),
    /// Row-sparse gradient of an embedding table.
    Rows(std::collections::BTreeMap<usize, Vec<f64>>),
}

/// Gradients of one backward pass, indexed like the [`ParamStore`] they came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradients {
    pub(crate) entries: Vec<Option<GradEntry>>,
}

impl Gradients {
    pub(crate) fn with_len(n: usize) -> Self {
        Gradients { entries: vec![None; n] }
    }

    pub(crate) fn dense_mut(&mut self, id: ParamId, len: usize) -> &mut [f64] {
        let slot = &mut self.entries[id.0];
        if slot.is_none() {
            *slot = Some(GradEntry::Dense(vec![0.0; len]));
        }
        match slot {
            Some(GradEntry::Dense(v)) => v,
            _ => unreachable!("parameter used both densely and row-sparsely"),
        }
    }

    pub(crate) fn row_mut(&mut self, id: ParamId, row: usize, cols: usize) -> &mut [f64] {
        let slot = &mut self.entries[id.0];
        if slot.is_none() {
            *slot = Some(GradEntry::Rows(Default::default()));
        }
        match slot {
            Some(GradEntry::Rows(m)) => m.entry(row).or_insert_with(|| vec![0.0; cols]),
            Some(GradEntry::Dense(v)) => &mut v[row * cols..(row + 1) * cols],
            None => unreachable!(),
        }
    }

    /// Gradient of one coordinate (0 when untouched).
    pub fn get(&self, id: ParamId, flat_index: usize, cols: usize) -> f64 {
        match self.entries.get(id.0).and_then(Option::as_ref) {
            None => 0.0,
            Some(GradEntry::Dense(v)) => v[flat_index],
            Some(GradEntry::Rows(m)) => m.get(&(flat_index / cols)).map_or(0.0, |r| r[flat_index % cols]),
        }
    }

    /// Materializes the gradient of one parameter densely.
    pub fn dense(&self, id: ParamId, len: usize, cols: usize) -> Vec<f64> {
        (0..len).map(|i| self.get(id, i, cols)).collect()
    }
}
