//! Small dense MLP with tanh hidden activations, linear output, and
//! reverse-mode gradients. Parameters live in one flat vector (layer
//! weights row-major, then biases) so the optimizer and checkpoints can
//! treat the network as a plain array.

use rand::Rng;

/// Feed-forward network. `widths` = [input, hidden..., output].
#[derive(Debug, Clone)]
pub struct Mlp {
    widths: Vec<usize>,
    params: Vec<f64>,
}

/// Per-step activation storage for backprop.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// Activations per layer, `activations[0]` is the input.
    activations: Vec<Vec<f64>>,
}

pub fn param_count(widths: &[usize]) -> usize {
    widths
        .windows(2)
        .map(|w| w[0] * w[1] + w[1])
        .sum()
}

impl Mlp {
    /// Fan-in scaled uniform init, zero biases.
    pub fn new<R: Rng>(widths: Vec<usize>, rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "need at least input and output layers");
        let n = param_count(&widths);
        let mut params = vec![0.0; n];
        let mut off = 0;
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in params.iter_mut().skip(off).take(fan_in * fan_out) {
                *p = rng.gen_range(-bound..bound);
            }
            off += fan_in * fan_out + fan_out;
        }
        Self { widths, params }
    }

    pub fn from_params(widths: Vec<usize>, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), param_count(&widths), "parameter count mismatch");
        Self { widths, params }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = ForwardCache::default();
        self.forward_cached(x, &mut cache)
    }

    /// Forward pass recording every layer activation for [`Self::backward`].
    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.widths[0]);
        cache.activations.clear();
        cache.activations.push(x.to_vec());
        let n_layers = self.widths.len() - 1;
        let mut off = 0;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[off..off + fan_in * fan_out];
            let b = &self.params[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            let prev = cache.activations.last().unwrap();
            let mut out = vec![0.0; fan_out];
            for (o, outv) in out.iter_mut().enumerate() {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let mut acc = b[o];
                for (wi, pi) in row.iter().zip(prev.iter()) {
                    acc += wi * pi;
                }
                *outv = if l + 1 < n_layers { acc.tanh() } else { acc };
            }
            cache.activations.push(out);
            off += fan_in * fan_out + fan_out;
        }
        cache.activations.last().unwrap().clone()
    }

    /// Accumulate dL/dparams into `grads` (same layout as `params`) given
    /// the output cotangent; returns the input cotangent.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64], grads: &mut [f64]) -> Vec<f64> {
        debug_assert_eq!(grads.len(), self.params.len());
        let n_layers = self.widths.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for l in 0..n_layers {
            offsets.push(off);
            off += self.widths[l] * self.widths[l + 1] + self.widths[l + 1];
        }

        let mut delta = d_out.to_vec();
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let off = offsets[l];
            let w = &self.params[off..off + fan_in * fan_out];
            let prev = &cache.activations[l];

            // Hidden layers carry the tanh derivative; the output is linear.
            if l + 1 < n_layers {
                let act = &cache.activations[l + 1];
                for (d, a) in delta.iter_mut().zip(act.iter()) {
                    *d *= 1.0 - a * a;
                }
            }

            let (gw, gb) = grads[off..off + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for o in 0..fan_out {
                let d = delta[o];
                gb[o] += d;
                let row = &mut gw[o * fan_in..(o + 1) * fan_in];
                for (g, p) in row.iter_mut().zip(prev.iter()) {
                    *g += d * p;
                }
            }

            let mut d_prev = vec![0.0; fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                let row = &w[o * fan_in..(o + 1) * fan_in];
                for (dp, wi) in d_prev.iter_mut().zip(row.iter()) {
                    *dp += d * wi;
                }
            }
            delta = d_prev;
        }
        delta
    }
}

/// Adam moments over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: usize,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let b1c = 1.0 - self.beta1.powi(self.t as i32);
        let b2c = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let mhat = self.m[i] / b1c;
            let vhat = self.v[i] / b2c;
            params[i] -= lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}
