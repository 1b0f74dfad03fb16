//! Dense layers with hand-written backpropagation. Batches are rows.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// `y = act(x · w + b)` with `w` stored `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub act: Activation,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize, act: Activation) -> Self {
        Self {
            w: Array2::zeros((n_in, n_out)),
            b: Array1::zeros(n_out),
            act,
        }
    }

    /// He-normal weights (variance 2/in for ReLU, 1/in otherwise), zero bias.
    pub fn init<R: Rng + ?Sized>(n_in: usize, n_out: usize, act: Activation, r: &mut R) -> Self {
        let gain = if act == Activation::Relu { 2.0 } else { 1.0 };
        let normal = Normal::new(0.0, (gain / n_in as f64).sqrt()).expect("finite std");
        let w = Array2::from_shape_simple_fn((n_in, n_out), || normal.sample(r));
        Self {
            w,
            b: Array1::zeros(n_out),
            act,
        }
    }

    pub fn n_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_out(&self) -> usize {
        self.w.ncols()
    }

    fn pre(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }

    fn activate(&self, mut z: Array2<f64>) -> Array2<f64> {
        if self.act == Activation::Relu {
            z.mapv_inplace(|v| v.max(0.0));
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Inputs and pre-activations of every layer from a forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
    pres: Vec<Array2<f64>>,
}

impl Mlp {
    /// Layers `sizes[0] → sizes[1] → …`; ReLU everywhere except the last layer,
    /// which uses `last`.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], last: Activation, r: &mut R) -> Self {
        let n = sizes.len().saturating_sub(1);
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { last } else { Activation::Relu };
                Dense::init(sizes[i], sizes[i + 1], act, r)
            })
            .collect();
        Self { layers }
    }

    pub fn n_in(&self) -> usize {
        self.layers.first().map_or(0, Dense::n_in)
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().map_or(0, Dense::n_out)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut h = x.clone();
        for l in &self.layers {
            h = l.activate(l.pre(&h));
        }
        h
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pres: Vec::with_capacity(self.layers.len()),
        };
        let mut h = x.clone();
        for l in &self.layers {
            let z = l.pre(&h);
            cache.inputs.push(h);
            h = l.activate(z.clone());
            cache.pres.push(z);
        }
        (h, cache)
    }

    /// Gradients (ordered like [`Mlp::tensors_mut`]) and the input gradient.
    pub fn backward(&self, cache: &MlpCache, dout: &Array2<f64>) -> (Vec<Vec<f64>>, Array2<f64>) {
        let mut grads = vec![Vec::new(); 2 * self.layers.len()];
        let mut d = dout.clone();
        for (i, l) in self.layers.iter().enumerate().rev() {
            if l.act == Activation::Relu {
                d.zip_mut_with(&cache.pres[i], |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
            }
            let dw = cache.inputs[i].t().dot(&d);
            let db = d.sum_axis(Axis(0));
            grads[2 * i] = dw.iter().copied().collect();
            grads[2 * i + 1] = db.to_vec();
            d = d.dot(&l.w.t());
        }
        (grads, d)
    }

    /// Weight then bias of each layer, as contiguous row-major slices.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.layers.len());
        for l in &mut self.layers {
            out.push(l.w.as_slice_mut().expect("standard layout"));
            out.push(l.b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    /// Shapes `(rows, cols)` of the tensors in [`Mlp::tensors_mut`] order; biases are `1 × n`.
    pub fn tensor_shapes(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .flat_map(|l| [(l.n_in(), l.n_out()), (1, l.n_out())])
            .collect()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.w.as_slice().expect("standard layout"), l.b.as_slice().expect("standard layout")])
            .collect()
    }

    /// Rounds every parameter to the nearest `f32`, matching what a checkpoint stores.
    pub fn round_to_f32(&mut self) {
        for t in self.tensors_mut() {
            for v in t {
                *v = *v as f32 as f64;
            }
        }
    }
}
