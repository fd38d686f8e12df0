use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::init::he_normal_fill;
use super::NetError;

/// Fully connected regressor: ReLU hidden layers, inverted dropout, linear scalar output.
///
/// Parameters live in one flat vector. Each layer stores its weights row-major
/// (`out x in`) followed by its biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    /// Layer widths from input to output; the last entry is always 1.
    pub sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub params: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    /// `acts[0]` is the input; `acts[l + 1]` is the (dropped-out) output of hidden layer `l`.
    pub acts: Vec<Vec<f64>>,
    /// Pre-activations of every layer, output layer last.
    pub pre: Vec<Vec<f64>>,
    /// Per hidden layer dropout scale factors (`0` or `1 / (1 - p)`); empty when not training.
    pub masks: Vec<Vec<f64>>,
    pub output: f64,
}

impl Mlp {
    /// Zero-initialized network.
    pub fn new(n_inputs: usize, hidden: &[usize], dropout_rate: f64) -> Self {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(n_inputs);
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let n = sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        Self {
            sizes,
            dropout_rate,
            params: vec![0.0; n],
        }
    }

    /// He-normal weights, zero biases.
    pub fn init(n_inputs: usize, hidden: &[usize], dropout_rate: f64, seed: u64) -> Self {
        let mut net = Self::new(n_inputs, hidden, dropout_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut off = 0;
        for w in net.sizes.clone().windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            he_normal_fill(fan_in, &mut net.params[off..off + fan_in * fan_out], &mut rng);
            off += fan_out * (fan_in + 1);
        }
        net
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Forward pass. Dropout is active only when `rng` is given and the rate is positive.
    pub fn forward_traced(
        &self,
        x: &[f64],
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<MlpTrace, NetError> {
        if x.len() != self.n_inputs() {
            return Err(NetError::ShapeMismatch {
                expected: self.n_inputs(),
                found: x.len(),
            });
        }
        let n_layers = self.n_layers();
        let keep = 1.0 - self.dropout_rate;
        let mut acts = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers);
        let mut masks = Vec::new();
        acts.push(x.to_vec());
        let mut off = 0;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_out * (n_in + 1)];
            off += n_out * (n_in + 1);
            let input = &acts[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| b[o] + dot(&w[o * n_in..(o + 1) * n_in], input))
                .collect();
            if l + 1 < n_layers {
                let mut a: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
                if let (Some(r), true) = (rng.as_deref_mut(), self.dropout_rate > 0.0) {
                    let mask: Vec<f64> = (0..n_out)
                        .map(|_| if r.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    for (v, m) in a.iter_mut().zip(&mask) {
                        *v *= m;
                    }
                    masks.push(mask);
                }
                acts.push(a);
            }
            pre.push(z);
        }
        let output = pre[n_layers - 1][0];
        Ok(MlpTrace {
            acts,
            pre,
            masks,
            output,
        })
    }

    /// Inference-mode prediction.
    pub fn predict(&self, x: &[f64]) -> Result<f64, NetError> {
        Ok(self.forward_traced(x, None)?.output)
    }

    /// Adds `d_out * d(output)/d(params)` into `grad`.
    pub fn backward(&self, trace: &MlpTrace, d_out: f64, grad: &mut [f64]) {
        let n_layers = self.n_layers();
        let offsets: Vec<usize> = self
            .sizes
            .windows(2)
            .scan(0, |acc, w| {
                let o = *acc;
                *acc += w[1] * (w[0] + 1);
                Some(o)
            })
            .collect();
        let mut delta = vec![d_out];
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &trace.acts[l];
            let w = &self.params[off..off + n_in * n_out];
            let (gw, gb) = grad[off..off + n_out * (n_in + 1)].split_at_mut(n_in * n_out);
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, a) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if l == 0 {
                break;
            }
            let mut below = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (b, wv) in below.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *b += d * wv;
                }
            }
            let z = &trace.pre[l - 1];
            for (j, b) in below.iter_mut().enumerate() {
                if z[j] <= 0.0 {
                    *b = 0.0;
                } else if let Some(mask) = trace.masks.get(l - 1) {
                    *b *= mask[j];
                }
            }
            delta = below;
        }
    }
}

/// Forward pass with dropout drawn from `rng` when training.
pub fn mlp_forward(net: &Mlp, x: &[f64], training: Option<&mut dyn RngCore>) -> Result<f64, NetError> {
    Ok(net.forward_traced(x, training)?.output)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::new(5, &[200, 200], 0.15);
        assert_eq!(net.n_params(), 5 * 200 + 200 + 200 * 200 + 200 + 200 + 1);
        assert_eq!(net.predict(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_unit_by_hand() {
        let mut net = Mlp::new(1, &[1], 0.0);
        // w1, b1, w2, b2
        net.params = vec![0.5, 0.25, 2.0, -0.1];
        // relu(0.5 + 0.25) * 2 - 0.1
        assert!((net.predict(&[1.0]).unwrap() - 1.4).abs() < 1e-15);
        // relu(-1.5 + 0.25) = 0
        assert_eq!(net.predict(&[-3.0]).unwrap(), -0.1);
    }

    #[test]
    fn inference_ignores_dropout() {
        let net = Mlp::init(5, &[16, 16], 0.5, 3);
        let x = [0.1, 0.2, -0.3, 0.4, 1.0];
        assert_eq!(
            net.predict(&x).unwrap().to_bits(),
            net.predict(&x).unwrap().to_bits()
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = net.forward_traced(&x, Some(&mut rng)).unwrap();
        assert_eq!(t.masks.len(), 2);
        assert!(t.masks.iter().flatten().all(|&m| m == 0.0 || m == 2.0));
    }

    #[test]
    fn shape_mismatch() {
        let net = Mlp::new(5, &[4], 0.0);
        assert_eq!(
            net.predict(&[1.0]),
            Err(NetError::ShapeMismatch {
                expected: 5,
                found: 1
            })
        );
    }
}
