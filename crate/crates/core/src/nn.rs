//! A small fully-connected network with ReLU hidden layers, a linear output,
//! hand-written backpropagation, an Adam optimizer and soft target updates.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math;
use crate::rng::{stream, Stream};

/// Hidden layer widths of the Q-networks.
pub const HIDDEN: [usize; 3] = [256, 128, 64];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("expected input of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("networks or gradients have different shapes")]
    ShapeMismatch,
    #[error("a network needs at least an input and an output width, all positive")]
    InvalidDims,
    #[error("non-finite gradient in layer {layer}; update rejected")]
    NonFiniteGradient { layer: usize },
    #[error("non-finite parameter in layer {layer} after update")]
    NonFiniteParameter { layer: usize },
    #[error("tau_soft must lie in (0, 1], got {0}")]
    InvalidTau(f64),
}

/// Dot product with four independent partial sums, which lets the compiler
/// pipeline and vectorize the loop. Summation order is fixed, so results are
/// still deterministic.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (a4, b4) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = a4.remainder().iter().zip(b4.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in a4.zip(b4) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Dense layer `y = W x + b`, weights row-major with `outputs` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights.chunks_exact(self.inputs).zip(&self.biases).map(|(row, b)| b + dot(row, x)).collect()
    }

    fn same_shape(&self, other: &Layer) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// `activations[0]` is the input; the last entry is the output.
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace has an input")
    }
}

/// Parameter-shaped gradient (or moment) storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients { layers: net.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect() }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) -> Result<(), NnError> {
        if self.layers.len() != other.layers.len()
            || self.layers.iter().zip(&other.layers).any(|(a, b)| !a.same_shape(b))
        {
            return Err(NnError::ShapeMismatch);
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += scale * y);
            a.biases.iter_mut().zip(&b.biases).for_each(|(x, y)| *x += scale * y);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }
}

impl Network {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero
    /// biases. A pure function of `dims` and `seed`.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self, NnError> {
        Self::check_dims(dims)?;
        let mut rng = stream(seed, Stream::NetworkInit);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let a = math::sqrt(6.0 / (fan_in + fan_out) as f64);
                let mut layer = Layer::zeros(fan_in, fan_out);
                layer.weights.iter_mut().for_each(|x| *x = rng.gen_range(-a..a));
                layer
            })
            .collect();
        Ok(Network { layers })
    }

    /// `input -> 256 -> 128 -> 64 -> output`.
    pub fn q_network(input: usize, output: usize, seed: u64) -> Result<Self, NnError> {
        Self::new(&[input, HIDDEN[0], HIDDEN[1], HIDDEN[2], output], seed)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self, NnError> {
        Self::check_dims(dims)?;
        Ok(Network { layers: dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect() })
    }

    fn check_dims(dims: &[usize]) -> Result<(), NnError> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(NnError::InvalidDims);
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs];
        d.extend(self.layers.iter().map(|l| l.outputs));
        d
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(&l.biases).all(|x| x.is_finite()))
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.input_size() {
            return Err(NnError::DimensionMismatch { expected: self.input_size(), got: x.len() });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut a = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            a = layer.affine(&a);
            if i < last {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        Ok(a)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<Trace, NnError> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut activations = vec![x.to_vec()];
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(activations.last().unwrap());
            let a = if i < last { z.iter().map(|v| v.max(0.0)).collect() } else { z.clone() };
            pre_activations.push(z);
            activations.push(a);
        }
        Ok(Trace { activations, pre_activations })
    }

    /// Gradients of a scalar loss whose gradient with respect to the output
    /// is `out_grad`, for the forward pass recorded in `trace`.
    pub fn backward(&self, trace: &Trace, out_grad: &[f64]) -> Result<Gradients, NnError> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_into(trace, out_grad, &mut grads)?;
        Ok(grads)
    }

    /// Like `backward` but adds the gradients into `grads`.
    pub fn backward_into(&self, trace: &Trace, out_grad: &[f64], grads: &mut Gradients) -> Result<(), NnError> {
        if trace.activations.len() != self.layers.len() + 1
            || grads.layers.len() != self.layers.len()
            || grads.layers.iter().zip(&self.layers).any(|(g, l)| !g.same_shape(l))
        {
            return Err(NnError::ShapeMismatch);
        }
        if out_grad.len() != self.output_size() {
            return Err(NnError::DimensionMismatch { expected: self.output_size(), got: out_grad.len() });
        }
        let mut delta = out_grad.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.activations[l];
            let g = &mut grads.layers[l];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                g.biases[o] += *d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(input).for_each(|(w, x)| *w += d * x);
            }
            if l > 0 {
                let z = &trace.pre_activations[l - 1];
                let mut prev = vec![0.0; layer.inputs];
                for (o, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
                }
                prev.iter_mut().zip(z).for_each(|(p, zi)| {
                    if *zi <= 0.0 {
                        *p = 0.0;
                    }
                });
                delta = prev;
            }
        }
        Ok(())
    }

    /// `self = tau * online + (1 - tau) * self`, parameter by parameter.
    pub fn soft_update(&mut self, online: &Network, tau: f64) -> Result<(), NnError> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(NnError::InvalidTau(tau));
        }
        if self.dims() != online.dims() {
            return Err(NnError::ShapeMismatch);
        }
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            let mix = |t: &mut f64, o: &f64| *t = if tau == 1.0 { *o } else { tau * o + (1.0 - tau) * *t };
            t.weights.iter_mut().zip(&o.weights).for_each(|(t, o)| mix(t, o));
            t.biases.iter_mut().zip(&o.biases).for_each(|(t, o)| mix(t, o));
        }
        Ok(())
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Gradients,
    pub v: Gradients,
}

impl Adam {
    pub fn new(net: &Network, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
        }
    }

    /// One descent step. Non-finite gradients are rejected before any state
    /// changes.
    pub fn update(&mut self, net: &mut Network, grads: &Gradients) -> Result<(), NnError> {
        if grads.layers.len() != net.layers.len()
            || grads.layers.iter().zip(&net.layers).any(|(g, l)| !g.same_shape(l))
            || self.m.layers.len() != net.layers.len()
        {
            return Err(NnError::ShapeMismatch);
        }
        if let Some(layer) = grads
            .layers
            .iter()
            .position(|g| g.weights.iter().chain(&g.biases).any(|x| !x.is_finite()))
        {
            return Err(NnError::NonFiniteGradient { layer });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - math::powi(self.beta1, t);
        let c2 = 1.0 - math::powi(self.beta2, t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let apply = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (math::sqrt(v_hat) + eps);
            }
        };
        for (l, layer) in net.layers.iter_mut().enumerate() {
            let (m, v, g) = (&mut self.m.layers[l], &mut self.v.layers[l], &grads.layers[l]);
            apply(&mut layer.weights, &g.weights, &mut m.weights, &mut v.weights);
            apply(&mut layer.biases, &g.biases, &mut m.biases, &mut v.biases);
        }
        if let Some(layer) = net.layers.iter().position(|l| l.weights.iter().chain(&l.biases).any(|x| !x.is_finite())) {
            return Err(NnError::NonFiniteParameter { layer });
        }
        Ok(())
    }
}

/// Parameter `k` of layer `l`, weights first, then biases.
fn param_mut(net: &mut Network, l: usize, k: usize) -> &mut f64 {
    let layer = &mut net.layers[l];
    let n_w = layer.weights.len();
    if k < n_w {
        &mut layer.weights[k]
    } else {
        &mut layer.biases[k - n_w]
    }
}

/// Result of comparing backpropagation against central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Parameters skipped because the perturbation flipped a ReLU.
    pub skipped_kinks: usize,
}

/// Checks `backward` against central finite differences of the loss
/// `L = out_grad · forward(x)` for every parameter. Relative error is
/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check(net: &Network, x: &[f64], out_grad: &[f64], eps: f64) -> Result<GradientCheck, NnError> {
    let trace = net.forward_cached(x)?;
    let analytic = net.backward(&trace, out_grad)?;
    let mask = |t: &Trace| -> Vec<bool> { t.pre_activations.iter().flatten().map(|z| *z > 0.0).collect() };
    let base_mask = mask(&trace);
    let loss = |n: &Network| -> Result<(f64, Vec<bool>), NnError> {
        let t = n.forward_cached(x)?;
        Ok((t.output().iter().zip(out_grad).map(|(y, g)| y * g).sum(), mask(&t)))
    };
    let mut probe = net.clone();
    let mut result = GradientCheck { max_rel_error: 0.0, checked: 0, skipped_kinks: 0 };
    for l in 0..net.layers.len() {
        let n_w = net.layers[l].weights.len();
        for k in 0..n_w + net.layers[l].biases.len() {
            let a = if k < n_w { analytic.layers[l].weights[k] } else { analytic.layers[l].biases[k - n_w] };
            let original = *param_mut(&mut probe, l, k);
            *param_mut(&mut probe, l, k) = original + eps;
            let (plus, m_plus) = loss(&probe)?;
            *param_mut(&mut probe, l, k) = original - eps;
            let (minus, m_minus) = loss(&probe)?;
            *param_mut(&mut probe, l, k) = original;
            if m_plus != base_mask || m_minus != base_mask {
                result.skipped_kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * eps);
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            result.max_rel_error = result.max_rel_error.max((a - numeric).abs() / denom);
            result.checked += 1;
        }
    }
    Ok(result)
}
