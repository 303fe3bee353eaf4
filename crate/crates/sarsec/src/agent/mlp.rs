//! Minimal dense network with hand-rolled backpropagation and Adam.
//!
//! Everything is `f64` and deterministic: parameter layout, update order,
//! and initialization are all fixed by construction so training runs
//! reproduce bit for bit.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `[out_dim x in_dim]`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn forward_into(&self, input: &[f64], pre: &mut Vec<f64>, post: &mut Vec<f64>) {
        pre.clear();
        post.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let z: f64 = self.bias[o] + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
            pre.push(z);
            post.push(match self.activation {
                Activation::Tanh => z.tanh(),
                Activation::Identity => z,
            });
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Activations recorded during a forward pass, for backprop.
#[derive(Clone, Debug, Default)]
pub struct ForwardCache {
    input: Vec<f64>,
    post: Vec<Vec<f64>>,
}

/// Gradient (or moment) buffer shaped like an [`Mlp`].
#[derive(Clone, Debug)]
pub struct MlpGrads {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl MlpGrads {
    pub fn zero(&mut self) {
        for (w, b) in &mut self.layers {
            w.iter_mut().for_each(|x| *x = 0.0);
            b.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (w, b) in &mut self.layers {
            w.iter_mut().for_each(|x| *x *= s);
            b.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn flat_len(&self) -> usize {
        self.layers.iter().map(|(w, b)| w.len() + b.len()).sum()
    }

    pub fn get_flat(&self, mut idx: usize) -> f64 {
        for (w, b) in &self.layers {
            if idx < w.len() {
                return w[idx];
            }
            idx -= w.len();
            if idx < b.len() {
                return b[idx];
            }
            idx -= b.len();
        }
        panic!("flat index out of range");
    }
}

impl Mlp {
    /// Fully connected network with tanh hidden layers and a linear output.
    /// `dims` runs input -> hidden... -> output. Xavier-uniform weights;
    /// the output layer is scaled by `output_scale`.
    pub fn new<R: Rng>(dims: &[usize], output_scale: f64, rng: &mut R) -> Mlp {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (k, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let last = k == dims.len() - 2;
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt()
                * if last { output_scale } else { 1.0 };
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            layers.push(Layer {
                in_dim: fan_in,
                out_dim: fan_out,
                weights,
                bias: vec![0.0; fan_out],
                activation: if last {
                    Activation::Identity
                } else {
                    Activation::Tanh
                },
            });
        }
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut cur = input.to_vec();
        let mut pre = Vec::new();
        let mut post = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut pre, &mut post);
            cur.clone_from(&post);
        }
        cur
    }

    pub fn forward_cached(&self, input: &[f64], cache: &mut ForwardCache) -> Vec<f64> {
        cache.input = input.to_vec();
        cache.post.clear();
        let mut cur = input.to_vec();
        let mut pre = Vec::new();
        let mut post = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, &mut pre, &mut post);
            cache.post.push(post.clone());
            cur.clone_from(&post);
        }
        cur
    }

    /// Accumulates `d(loss)/d(params)` into `grads` given the gradient with
    /// respect to the network output.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &[f64], grads: &mut MlpGrads) {
        let mut delta = grad_output.to_vec();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            // Through the activation.
            if layer.activation == Activation::Tanh {
                for (d, y) in delta.iter_mut().zip(&cache.post[k]) {
                    *d *= 1.0 - y * y;
                }
            }
            let input: &[f64] = if k == 0 {
                &cache.input
            } else {
                &cache.post[k - 1]
            };
            let (gw, gb) = &mut grads.layers[k];
            for o in 0..layer.out_dim {
                gb[o] += delta[o];
                let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += delta[o] * x;
                }
            }
            if k > 0 {
                let mut next = vec![0.0; layer.in_dim];
                for o in 0..layer.out_dim {
                    let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (n, w) in next.iter_mut().zip(row) {
                        *n += delta[o] * w;
                    }
                }
                delta = next;
            }
        }
    }

    pub fn zeros_like(&self) -> MlpGrads {
        MlpGrads {
            layers: self
                .layers
                .iter()
                .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
                .collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn get_param(&self, mut idx: usize) -> f64 {
        for l in &self.layers {
            if idx < l.weights.len() {
                return l.weights[idx];
            }
            idx -= l.weights.len();
            if idx < l.bias.len() {
                return l.bias[idx];
            }
            idx -= l.bias.len();
        }
        panic!("flat index out of range");
    }

    pub fn set_param(&mut self, mut idx: usize, value: f64) {
        for l in &mut self.layers {
            if idx < l.weights.len() {
                l.weights[idx] = value;
                return;
            }
            idx -= l.weights.len();
            if idx < l.bias.len() {
                l.bias[idx] = value;
                return;
            }
            idx -= l.bias.len();
        }
        panic!("flat index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().all(|x| x.is_finite()) && l.bias.iter().all(|x| x.is_finite()))
    }
}

/// Adam with bias correction over an [`Mlp`]'s parameters.
#[derive(Clone, Debug)]
pub struct Adam {
    m: MlpGrads,
    v: MlpGrads,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(shape: &Mlp) -> Adam {
        Adam {
            m: shape.zeros_like(),
            v: shape.zeros_like(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut Mlp, grads: &MlpGrads, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (k, layer) in params.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[k];
            let (mw, mb) = &mut self.m.layers[k];
            let (vw, vb) = &mut self.v.layers[k];
            for i in 0..layer.weights.len() {
                let g = gw[i];
                mw[i] = self.beta1 * mw[i] + (1.0 - self.beta1) * g;
                vw[i] = self.beta2 * vw[i] + (1.0 - self.beta2) * g * g;
                layer.weights[i] -= lr * (mw[i] / bc1) / ((vw[i] / bc2).sqrt() + self.eps);
            }
            for i in 0..layer.bias.len() {
                let g = gb[i];
                mb[i] = self.beta1 * mb[i] + (1.0 - self.beta1) * g;
                vb[i] = self.beta2 * vb[i] + (1.0 - self.beta2) * g * g;
                layer.bias[i] -= lr * (mb[i] / bc1) / ((vb[i] / bc2).sqrt() + self.eps);
            }
        }
    }
}
