//! Fully connected tanh network over a flat parameter vector, with an
//! explicit reverse pass.

use rand::Rng;

/// Layer sizes `[in, hidden.., out]`. Parameters are stored per layer as the
/// row-major weight matrix (`out × in`) followed by the bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

/// Activations kept from a forward pass for the reverse pass.
#[derive(Clone, Debug, Default)]
pub struct MlpCache {
    /// `acts[0]` is the input; `acts[l]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl MlpCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0), "bad topology {sizes:?}");
        Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; param_count(sizes)],
        }
    }

    /// Uniform weights with standard deviation `gain / sqrt(fan_in)`, zero
    /// biases. `output_gain` applies to the last layer.
    pub fn init<R: Rng>(sizes: &[usize], hidden_gain: f64, output_gain: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        let layers = sizes.len() - 1;
        let mut off = 0;
        for l in 0..layers {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let gain = if l + 1 == layers { output_gain } else { hidden_gain };
            let bound = gain * (3.0 / n_in as f64).sqrt();
            for w in &mut net.params[off..off + n_in * n_out] {
                *w = rng.random_range(-bound..=bound);
            }
            off += (n_in + 1) * n_out;
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Offset of layer `l`'s weights; its bias follows at `+ in·out`.
    fn offset(&self, l: usize) -> usize {
        param_count(&self.sizes[..=l])
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = MlpCache::default();
        self.forward_cached(x, &mut cache);
        cache.acts.pop().unwrap()
    }

    pub fn forward_cached(&self, x: &[f64], cache: &mut MlpCache) {
        assert_eq!(x.len(), self.input_dim(), "input dimension");
        cache.acts.clear();
        cache.acts.push(x.to_vec());
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offset(l);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + (n_in + 1) * n_out];
            let input = &cache.acts[l];
            let last = l + 1 == self.layers();
            let out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    let z = b[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            cache.acts.push(out);
        }
    }

    /// Accumulates `∂L/∂params` into `grad` given `∂L/∂output`.
    pub fn backward(&self, cache: &MlpCache, d_out: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(grad.len(), self.params.len());
        let mut delta = d_out.to_vec();
        for l in (0..self.layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offset(l);
            let input = &cache.acts[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let g = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (gi, xi) in g.iter_mut().zip(input) {
                    *gi += d * xi;
                }
                grad[off + n_in * n_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *p += d * wi;
                }
            }
            // hidden activations are tanh outputs: d tanh = 1 − a²
            for (p, a) in prev.iter_mut().zip(input) {
                *p *= 1.0 - a * a;
            }
            delta = prev;
        }
    }

    /// Scales the final layer's weights and bias by `c`.
    pub fn scale_output_layer(&mut self, c: f64) {
        let l = self.layers() - 1;
        let off = self.offset(l);
        let end = off + (self.sizes[l] + 1) * self.sizes[l + 1];
        for p in &mut self.params[off..end] {
            *p *= c;
        }
    }
}
