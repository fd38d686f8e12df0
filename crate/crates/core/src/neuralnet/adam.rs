use serde::{Deserialize, Serialize};

/// Moment accumulators for bias-corrected Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update of `params` in place.
    ///
    /// # Panics
    ///
    /// If `params`, `grads` and the accumulators differ in length.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], lr: f64) {
    state.step(params, grads, lr);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [3.7, -0.02] {
            let mut s = AdamState::new(1);
            let mut p = [1.0];
            s.step(&mut p, &[g], 0.01);
            assert!((p[0] - (1.0 - 0.01 * f64::signum(g))).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut s = AdamState::new(3);
        let mut p = [0.5, -2.0, 9.0];
        for _ in 0..50 {
            s.step(&mut p, &[0.0; 3], 0.1);
        }
        assert_eq!(p, [0.5, -2.0, 9.0]);
        assert_eq!(s.step, 50);
    }
}
