//! Dense and recurrent regressors with hand-written reverse-mode gradients.

mod adam;
mod init;
mod loss;
mod lstm;
mod mlp;
mod model;
mod train;

use rand::RngCore;
use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use init::{glorot_uniform_fill, he_normal_fill, he_normal_init, orthogonal_columns};
pub use loss::{loss_lstm, loss_mlp, Loss};
pub use lstm::{lstm_forward, LstmNet, LstmTrace};
pub use mlp::{mlp_forward, Mlp, MlpTrace};
pub use model::{
    train_lstm, train_mlp, LstmConfig, MlpConfig, ModelConfig, ModelKind, ModelNetwork,
    TrainedModel, LSTM_PARAMETER_BUDGET, MODEL_FORMAT_VERSION, TRAINING_LOG_HEADER,
};
pub use train::{derive_restart_seed, fit, EpochLoss, FitOutcome, TrainSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("input has {found} values, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("relative loss undefined for a zero target")]
    ZeroTrueValue,
    #[error("loss became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed model file: {0}")]
    Format(String),
}

/// Common interface of the two architectures, used by the trainer.
pub trait Network: Clone + Send + Sync {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    fn predict(&self, input: &[f64]) -> Result<f64, NetError>;
    /// Forward pass (training mode if `rng` is given), then adds the gradient of
    /// the per-sample loss into `grad`. Returns the loss.
    fn sample_gradient(
        &self,
        input: &[f64],
        target: f64,
        loss: Loss,
        rng: Option<&mut dyn RngCore>,
        grad: &mut [f64],
    ) -> Result<f64, NetError>;
}

impl Network for Mlp {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn predict(&self, input: &[f64]) -> Result<f64, NetError> {
        Mlp::predict(self, input)
    }

    fn sample_gradient(
        &self,
        input: &[f64],
        target: f64,
        loss: Loss,
        rng: Option<&mut dyn RngCore>,
        grad: &mut [f64],
    ) -> Result<f64, NetError> {
        let trace = self.forward_traced(input, rng)?;
        let (value, d_out) = loss.eval(target, trace.output)?;
        self.backward(&trace, d_out, grad);
        Ok(value)
    }
}

impl Network for LstmNet {
    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn predict(&self, input: &[f64]) -> Result<f64, NetError> {
        LstmNet::predict(self, input)
    }

    fn sample_gradient(
        &self,
        input: &[f64],
        target: f64,
        loss: Loss,
        _rng: Option<&mut dyn RngCore>,
        grad: &mut [f64],
    ) -> Result<f64, NetError> {
        let trace = self.forward_traced(input)?;
        let (value, d_out) = loss.eval(target, trace.output)?;
        self.backward(&trace, d_out, grad);
        Ok(value)
    }
}

/// Summed loss and summed parameter gradient over a batch, inference mode.
pub fn backward<N: Network>(
    net: &N,
    inputs: &[&[f64]],
    targets: &[f64],
    loss: Loss,
) -> Result<(f64, Vec<f64>), NetError> {
    if inputs.len() != targets.len() {
        return Err(NetError::ShapeMismatch {
            expected: inputs.len(),
            found: targets.len(),
        });
    }
    let mut grad = vec![0.0; net.params().len()];
    let mut total = 0.0;
    for (x, &y) in inputs.iter().zip(targets) {
        total += net.sample_gradient(x, y, loss, None, &mut grad)?;
    }
    Ok((total, grad))
}
