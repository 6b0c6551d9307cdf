use rand::Rng;
use serde::{Deserialize, Serialize};

/// A named dense tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: (usize, usize),
    pub data: Vec<f64>,
}

/// Named parameter blocks, addressed by the index returned from `add`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    tensors: Vec<Tensor>,
}

impl ParamStore {
    pub fn add(&mut self, name: &str, rows: usize, cols: usize, data: Vec<f64>) -> usize {
        assert_eq!(data.len(), rows * cols, "{name}: data does not match shape");
        assert!(self.find(name).is_none(), "duplicate parameter {name}");
        self.tensors.push(Tensor { name: name.into(), shape: (rows, cols), data });
        self.tensors.len() - 1
    }

    /// Uniform in ±sqrt(6 / (rows + cols)).
    pub fn add_random(&mut self, name: &str, rows: usize, cols: usize, rng: &mut impl Rng) -> usize {
        let a = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect();
        self.add(name, rows, cols, data)
    }

    pub fn add_filled(&mut self, name: &str, rows: usize, cols: usize, value: f64) -> usize {
        self.add(name, rows, cols, vec![value; rows * cols])
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.tensors.iter().position(|t| t.name == name)
    }

    pub fn name(&self, id: usize) -> &str {
        &self.tensors[id].name
    }

    pub fn shape(&self, id: usize) -> (usize, usize) {
        self.tensors[id].shape
    }

    pub fn values(&self, id: usize) -> &[f64] {
        &self.tensors[id].data
    }

    pub fn values_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.tensors[id].data
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }
}

/// Gradients with the same layout as a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    values: Vec<Vec<f64>>,
}

impl Grads {
    pub fn zeros(params: &ParamStore) -> Self {
        Grads { values: params.tensors.iter().map(|t| vec![0.0; t.data.len()]).collect() }
    }

    pub fn values(&self, id: usize) -> &[f64] {
        &self.values[id]
    }

    pub fn values_mut(&mut self, id: usize) -> &mut [f64] {
        &mut self.values[id]
    }

    pub fn clear(&mut self) {
        for v in &mut self.values {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            v.iter_mut().for_each(|x| *x *= factor);
        }
    }
}
