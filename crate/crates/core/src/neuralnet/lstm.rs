use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::init::{glorot_uniform_fill, orthogonal_columns};
use super::mlp::dot;
use super::NetError;

/// Two stacked LSTM blocks with a skip connection and a dense read-out.
///
/// Block 2 sees `[h1_t; x_t]` at every step. The prediction is an affine map of
/// block 2's final hidden state. Gate order inside each block is input, forget,
/// cell candidate, output. Layout of `params`: block 1 weights
/// (`4H1 x (I + H1)`) and biases, block 2 weights (`4H2 x (H1 + I + H2)`) and
/// biases, dense weights (`H2`) and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmNet {
    pub input_dim: usize,
    pub cells_block1: usize,
    pub cells_block2: usize,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    n_in: usize,
    hidden: usize,
    w_off: usize,
    b_off: usize,
}

impl Block {
    fn width(&self) -> usize {
        self.n_in + self.hidden
    }

    fn len(&self) -> usize {
        4 * self.hidden * (self.width() + 1)
    }
}

/// Recorded activations of one block over a sequence.
#[derive(Debug, Clone)]
struct BlockTrace {
    steps: usize,
    /// `[x_t; h_{t-1}]` per step.
    xh: Vec<f64>,
    /// Post-activation gates `i, f, g, o` per step.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Block {
    fn forward(&self, params: &[f64], inputs: &[f64]) -> BlockTrace {
        let (n_in, hd, width) = (self.n_in, self.hidden, self.width());
        let steps = inputs.len() / n_in;
        let w = &params[self.w_off..self.w_off + 4 * hd * width];
        let b = &params[self.b_off..self.b_off + 4 * hd];
        let mut tr = BlockTrace {
            steps,
            xh: vec![0.0; steps * width],
            gates: vec![0.0; steps * 4 * hd],
            c: vec![0.0; steps * hd],
            tanh_c: vec![0.0; steps * hd],
            h: vec![0.0; steps * hd],
        };
        for t in 0..steps {
            {
                let xh = &mut tr.xh[t * width..(t + 1) * width];
                xh[..n_in].copy_from_slice(&inputs[t * n_in..(t + 1) * n_in]);
                if t > 0 {
                    xh[n_in..].copy_from_slice(&tr.h[(t - 1) * hd..t * hd]);
                }
            }
            let xh = &tr.xh[t * width..(t + 1) * width];
            let gates = &mut tr.gates[t * 4 * hd..(t + 1) * 4 * hd];
            for (r, gate) in gates.iter_mut().enumerate() {
                let z = b[r] + dot(&w[r * width..(r + 1) * width], xh);
                *gate = if (2 * hd..3 * hd).contains(&r) {
                    z.tanh()
                } else {
                    sigmoid(z)
                };
            }
            for k in 0..hd {
                let (i, f, g, o) = (gates[k], gates[hd + k], gates[2 * hd + k], gates[3 * hd + k]);
                let c_prev = if t > 0 { tr.c[(t - 1) * hd + k] } else { 0.0 };
                let c = f * c_prev + i * g;
                let tc = c.tanh();
                tr.c[t * hd + k] = c;
                tr.tanh_c[t * hd + k] = tc;
                tr.h[t * hd + k] = o * tc;
            }
        }
        tr
    }

    /// Backpropagation through time. `dh_ext` holds the loss gradient arriving
    /// at each hidden state from above; returns the gradient for each input.
    fn backward(&self, params: &[f64], tr: &BlockTrace, dh_ext: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let (n_in, hd, width) = (self.n_in, self.hidden, self.width());
        let w = &params[self.w_off..self.w_off + 4 * hd * width];
        let mut dx = vec![0.0; tr.steps * n_in];
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut dz = vec![0.0; 4 * hd];
        for t in (0..tr.steps).rev() {
            let gates = &tr.gates[t * 4 * hd..(t + 1) * 4 * hd];
            for k in 0..hd {
                let (i, f, g, o) = (gates[k], gates[hd + k], gates[2 * hd + k], gates[3 * hd + k]);
                let tc = tr.tanh_c[t * hd + k];
                let c_prev = if t > 0 { tr.c[(t - 1) * hd + k] } else { 0.0 };
                let dh = dh_ext[t * hd + k] + dh_next[k];
                let dc = dh * o * (1.0 - tc * tc) + dc_next[k];
                dz[k] = dc * g * i * (1.0 - i);
                dz[hd + k] = dc * c_prev * f * (1.0 - f);
                dz[2 * hd + k] = dc * i * (1.0 - g * g);
                dz[3 * hd + k] = dh * tc * o * (1.0 - o);
                dc_next[k] = dc * f;
            }
            let xh = &tr.xh[t * width..(t + 1) * width];
            let mut dxh = vec![0.0; width];
            for (r, &d) in dz.iter().enumerate() {
                grad[self.b_off + r] += d;
                let gw = &mut grad[self.w_off + r * width..self.w_off + (r + 1) * width];
                for (g, v) in gw.iter_mut().zip(xh) {
                    *g += d * v;
                }
                for (acc, wv) in dxh.iter_mut().zip(&w[r * width..(r + 1) * width]) {
                    *acc += d * wv;
                }
            }
            dx[t * n_in..(t + 1) * n_in].copy_from_slice(&dxh[..n_in]);
            dh_next.copy_from_slice(&dxh[n_in..]);
        }
        dx
    }
}

/// Recorded forward pass of the whole network.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    block1: BlockTrace,
    block2: BlockTrace,
    pub output: f64,
}

impl LstmTrace {
    /// Hidden-state sequences of both blocks, step-major.
    pub fn hidden_states(&self) -> (&[f64], &[f64]) {
        (&self.block1.h, &self.block2.h)
    }
}

impl LstmNet {
    /// Zero-initialized network.
    pub fn new(input_dim: usize, cells_block1: usize, cells_block2: usize) -> Self {
        let mut net = Self {
            input_dim,
            cells_block1,
            cells_block2,
            params: Vec::new(),
        };
        let (_, _, total) = net.layout();
        net.params = vec![0.0; total];
        net
    }

    /// Glorot-uniform input weights, orthogonal recurrent weights, forget-gate
    /// biases 1, other biases 0; Glorot-uniform read-out.
    pub fn init(input_dim: usize, cells_block1: usize, cells_block2: usize, seed: u64) -> Self {
        let mut net = Self::new(input_dim, cells_block1, cells_block2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (b1, b2, _) = net.layout();
        for blk in [b1, b2] {
            let (n_in, hd, width) = (blk.n_in, blk.hidden, blk.width());
            let mut kernel = vec![0.0; 4 * hd * n_in];
            glorot_uniform_fill(n_in, 4 * hd, &mut kernel, &mut rng);
            let recurrent = orthogonal_columns(4 * hd, hd, &mut rng);
            for r in 0..4 * hd {
                let row = &mut net.params[blk.w_off + r * width..blk.w_off + (r + 1) * width];
                row[..n_in].copy_from_slice(&kernel[r * n_in..(r + 1) * n_in]);
                row[n_in..].copy_from_slice(&recurrent[r * hd..(r + 1) * hd]);
            }
            let f = blk.b_off + hd;
            net.params[f..f + hd].fill(1.0);
        }
        let d = b2.w_off + b2.len();
        glorot_uniform_fill(cells_block2, 1, &mut net.params[d..d + cells_block2], &mut rng);
        net
    }

    fn layout(&self) -> (Block, Block, usize) {
        let (i, h1, h2) = (self.input_dim, self.cells_block1, self.cells_block2);
        let b1 = Block {
            n_in: i,
            hidden: h1,
            w_off: 0,
            b_off: 4 * h1 * (i + h1),
        };
        let o2 = b1.len();
        let b2 = Block {
            n_in: h1 + i,
            hidden: h2,
            w_off: o2,
            b_off: o2 + 4 * h2 * (h1 + i + h2),
        };
        let total = o2 + b2.len() + h2 + 1;
        (b1, b2, total)
    }

    pub fn n_params(&self) -> usize {
        self.layout().2
    }

    pub fn forward_traced(&self, sequence: &[f64]) -> Result<LstmTrace, NetError> {
        let i = self.input_dim;
        if sequence.is_empty() || !sequence.len().is_multiple_of(i) {
            return Err(NetError::ShapeMismatch {
                expected: i,
                found: sequence.len(),
            });
        }
        let (b1, b2, _) = self.layout();
        let steps = sequence.len() / i;
        let h1 = self.cells_block1;
        let block1 = b1.forward(&self.params, sequence);
        let mut inputs2 = vec![0.0; steps * (h1 + i)];
        for t in 0..steps {
            let row = &mut inputs2[t * (h1 + i)..(t + 1) * (h1 + i)];
            row[..h1].copy_from_slice(&block1.h[t * h1..(t + 1) * h1]);
            row[h1..].copy_from_slice(&sequence[t * i..(t + 1) * i]);
        }
        let block2 = b2.forward(&self.params, &inputs2);
        let d = b2.w_off + b2.len();
        let h2 = self.cells_block2;
        let last = &block2.h[(steps - 1) * h2..steps * h2];
        let output = self.params[d + h2] + dot(&self.params[d..d + h2], last);
        Ok(LstmTrace {
            block1,
            block2,
            output,
        })
    }

    pub fn predict(&self, sequence: &[f64]) -> Result<f64, NetError> {
        Ok(self.forward_traced(sequence)?.output)
    }

    /// Adds `d_out * d(output)/d(params)` into `grad`.
    pub fn backward(&self, trace: &LstmTrace, d_out: f64, grad: &mut [f64]) {
        let (b1, b2, _) = self.layout();
        let (h1, h2, i) = (self.cells_block1, self.cells_block2, self.input_dim);
        let steps = trace.block2.steps;
        let d = b2.w_off + b2.len();
        let last = &trace.block2.h[(steps - 1) * h2..steps * h2];
        for k in 0..h2 {
            grad[d + k] += d_out * last[k];
        }
        grad[d + h2] += d_out;
        let mut dh2 = vec![0.0; steps * h2];
        for k in 0..h2 {
            dh2[(steps - 1) * h2 + k] = d_out * self.params[d + k];
        }
        let d_in2 = b2.backward(&self.params, &trace.block2, &dh2, grad);
        let mut dh1 = vec![0.0; steps * h1];
        for t in 0..steps {
            dh1[t * h1..(t + 1) * h1].copy_from_slice(&d_in2[t * (h1 + i)..t * (h1 + i) + h1]);
        }
        b1.backward(&self.params, &trace.block1, &dh1, grad);
    }
}

/// Inference-mode prediction for one window.
pub fn lstm_forward(net: &LstmNet, sequence: &[f64]) -> Result<f64, NetError> {
    net.predict(sequence)
}
