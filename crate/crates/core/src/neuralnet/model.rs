use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::train::{fit, EpochLoss, TrainSettings};
use super::{Loss, LstmNet, Mlp, NetError};
use crate::csvio::write_atomic;
use crate::datasets::{DatasetBundle, LstmSample, MlpSample, Sample, Standardizer};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const TRAINING_LOG_HEADER: &str = "epoch,train_loss,val_loss";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Lstm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Lstm => "lstm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mlp" => Ok(ModelKind::Mlp),
            "lstm" => Ok(ModelKind::Lstm),
            other => Err(NetError::InvalidConfig(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Value-to-value regressor settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub neurons_per_layer: usize,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 2,
            neurons_per_layer: 200,
            dropout_rate: 0.15,
            learning_rate: 0.001,
            batch_size: 512,
            max_epochs: 1000,
            early_stop_patience: 100,
            restarts: 3,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: &str| Err(NetError::InvalidConfig(format!("mlp: {m}")));
        if self.hidden_layers == 0
            || self.neurons_per_layer == 0
            || self.batch_size == 0
            || self.max_epochs == 0
            || self.early_stop_patience == 0
            || self.restarts == 0
        {
            return bad("all counts must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout rate must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.early_stop_patience > self.max_epochs {
            return bad("patience exceeds the epoch cap");
        }
        Ok(())
    }

    fn hidden(&self) -> Vec<usize> {
        vec![self.neurons_per_layer; self.hidden_layers]
    }
}

/// Sequence-to-value regressor settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub cells_block1: usize,
    pub cells_block2: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub sequence_length_min: f64,
    pub overlap: f64,
    pub restarts: usize,
    pub seed: u64,
}

/// Upper bound on trainable LSTM parameters for a scalar input sequence.
pub const LSTM_PARAMETER_BUDGET: usize = 500;

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            cells_block1: 6,
            cells_block2: 4,
            learning_rate: 0.01,
            batch_size: 25,
            epochs: 500,
            sequence_length_min: 165.0,
            overlap: 0.75,
            restarts: 3,
            seed: 0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: String| Err(NetError::InvalidConfig(format!("lstm: {m}")));
        if self.cells_block1 == 0
            || self.cells_block2 == 0
            || self.batch_size == 0
            || self.epochs == 0
            || self.restarts == 0
        {
            return bad("all counts must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive".into());
        }
        if !(self.sequence_length_min > 0.0 && self.sequence_length_min.is_finite()) {
            return bad("sequence length must be positive".into());
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return bad("overlap must lie in [0, 1)".into());
        }
        let n = self.n_params();
        if n >= LSTM_PARAMETER_BUDGET {
            return bad(format!("{n} trainable parameters, budget is {LSTM_PARAMETER_BUDGET}"));
        }
        Ok(())
    }

    /// Trainable parameters for a scalar input sequence.
    pub fn n_params(&self) -> usize {
        LstmNet::new(1, self.cells_block1, self.cells_block2).n_params()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Mlp(MlpConfig),
    Lstm(LstmConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelNetwork {
    Mlp(Mlp),
    Lstm(LstmNet),
}

/// A trained network with everything needed to apply it to new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub kind: ModelKind,
    pub config: ModelConfig,
    pub network: ModelNetwork,
    pub feature_standardizer: Standardizer,
    pub target_standardizer: Option<Standardizer>,
    pub history: Vec<EpochLoss>,
    pub best_epoch: usize,
    /// Winning restart and the seed it was initialized from.
    pub restart: usize,
    pub restart_seed: u64,
    pub seed: u64,
    /// Share of the training side the model saw.
    pub training_fraction: f64,
}

impl TrainedModel {
    /// Prediction in the (standardized, log-transformed) target space.
    pub fn predict(&self, inputs: &[f64]) -> Result<f64, NetError> {
        match &self.network {
            ModelNetwork::Mlp(n) => n.predict(inputs),
            ModelNetwork::Lstm(n) => n.predict(inputs),
        }
    }

    pub fn predict_samples<S: Sample>(&self, samples: &[S]) -> Result<Vec<f64>, NetError> {
        samples.iter().map(|s| self.predict(s.inputs())).collect()
    }

    pub fn n_params(&self) -> usize {
        match &self.network {
            ModelNetwork::Mlp(n) => n.n_params(),
            ModelNetwork::Lstm(n) => n.n_params(),
        }
    }

    pub fn best_val_loss(&self) -> f64 {
        self.history[self.best_epoch].val_loss
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        #[derive(Deserialize)]
        struct Probe {
            version: u32,
        }
        let probe: Probe =
            serde_json::from_str(text).map_err(|e| NetError::Format(e.to_string()))?;
        if probe.version != MODEL_FORMAT_VERSION {
            return Err(NetError::UnsupportedVersion(probe.version));
        }
        serde_json::from_str(text).map_err(|e| NetError::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), NetError> {
        write_atomic(path, self.to_json().as_bytes()).map_err(|e| NetError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn training_log_csv(&self) -> String {
        let mut out = String::from(TRAINING_LOG_HEADER);
        out.push('\n');
        for h in &self.history {
            out.push_str(&format!("{},{:e},{:e}\n", h.epoch, h.train_loss, h.val_loss));
        }
        out
    }

    pub fn write_training_log(&self, path: &Path) -> Result<(), NetError> {
        write_atomic(path, self.training_log_csv().as_bytes()).map_err(|e| NetError::Io(e.to_string()))
    }
}

/// Trains the value-to-value model on a bundle with the relative absolute loss.
pub fn train_mlp(
    bundle: &DatasetBundle<MlpSample>,
    config: &MlpConfig,
) -> Result<TrainedModel, NetError> {
    config.validate()?;
    let n_inputs = bundle.feature_standardizer.dims();
    let hidden = config.hidden();
    let settings = TrainSettings {
        loss: Loss::RelativeAbsolute,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
        max_epochs: config.max_epochs,
        patience: Some(config.early_stop_patience),
        restarts: config.restarts,
        seed: config.seed,
    };
    let out = fit(
        |s| Mlp::init(n_inputs, &hidden, config.dropout_rate, s),
        &bundle.train,
        &bundle.validation,
        &settings,
    )?;
    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        kind: ModelKind::Mlp,
        config: ModelConfig::Mlp(config.clone()),
        network: ModelNetwork::Mlp(out.net),
        feature_standardizer: bundle.feature_standardizer.clone(),
        target_standardizer: bundle.target_standardizer.clone(),
        history: out.history,
        best_epoch: out.best_epoch,
        restart: out.restart,
        restart_seed: out.restart_seed,
        seed: config.seed,
        training_fraction: bundle.fraction,
    })
}

/// Trains the sequence-to-value model on a windowed bundle with the squared loss.
///
/// The bundle's window length and overlap must match the configuration.
pub fn train_lstm(
    bundle: &DatasetBundle<LstmSample>,
    config: &LstmConfig,
) -> Result<TrainedModel, NetError> {
    config.validate()?;
    let seq = bundle
        .sequence
        .ok_or_else(|| NetError::InvalidConfig("bundle carries no window parameters".into()))?;
    if seq.sequence_length_min != config.sequence_length_min || seq.overlap != config.overlap {
        return Err(NetError::InvalidConfig(format!(
            "bundle windows are {} min at overlap {}, config asks for {} min at {}",
            seq.sequence_length_min, seq.overlap, config.sequence_length_min, config.overlap
        )));
    }
    let settings = TrainSettings {
        loss: Loss::Squared,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
        max_epochs: config.epochs,
        patience: None,
        restarts: config.restarts,
        seed: config.seed,
    };
    let out = fit(
        |s| LstmNet::init(1, config.cells_block1, config.cells_block2, s),
        &bundle.train,
        &bundle.validation,
        &settings,
    )?;
    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        kind: ModelKind::Lstm,
        config: ModelConfig::Lstm(config.clone()),
        network: ModelNetwork::Lstm(out.net),
        feature_standardizer: bundle.feature_standardizer.clone(),
        target_standardizer: bundle.target_standardizer.clone(),
        history: out.history,
        best_epoch: out.best_epoch,
        restart: out.restart,
        restart_seed: out.restart_seed,
        seed: config.seed,
        training_fraction: bundle.fraction,
    })
}
