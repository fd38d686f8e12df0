//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::creepsim::{CreepMaterial, JointGeometry, StandoffElement};
use crate::datasets::{SequenceParams, SplitSpec};
use crate::neuralnet::{LstmConfig, MlpConfig, ModelKind};
use crate::profilegen::ProfileSpec;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Everything one experiment run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub config_version: u32,
    /// Master seed; every stochastic stage derives its own seed from it.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Profile settings; the seed field is ignored in favor of the derived one.
    pub profile: ProfileSpec,
    pub material: CreepMaterial,
    pub geometry: JointGeometry,
    pub dt_s: f64,
    pub split: SplitSpec,
    /// Training-side shares for the fraction sweep, ascending.
    pub fractions: Vec<f64>,
    /// Window lengths for the sequence-length sweep, minutes.
    pub seq_lengths_min: Vec<f64>,
    pub mlp: MlpConfig,
    pub lstm: LstmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            config_version: CONFIG_VERSION,
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            profile: ProfileSpec::default(),
            material: CreepMaterial::default(),
            geometry: JointGeometry::default(),
            dt_s: 1.0,
            split: SplitSpec::default(),
            fractions: vec![0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0],
            seq_lengths_min: vec![10.0, 41.0, 165.0, 660.0],
            mlp: MlpConfig::default(),
            lstm: LstmConfig::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse `{value}` for `{key}`"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}

fn format_list(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

macro_rules! scalar_keys {
    ($($key:literal => $($field:ident).+),* $(,)?) => {
        fn scalar_entries(&self) -> Vec<(&'static str, String)> {
            vec![$(($key, self.$($field).+.to_string())),*]
        }

        fn set_scalar(&mut self, key: &str, value: &str) -> Option<Result<(), String>> {
            match key {
                $($key => Some(parse_value(key, value).map(|v| self.$($field).+ = v)),)*
                _ => None,
            }
        }
    };
}

impl ExperimentConfig {
    scalar_keys! {
        "config_version" => config_version,
        "seed" => seed,
        "profile.n_half_cycles" => profile.n_half_cycles,
        "profile.target_mean_c" => profile.target_mean_c,
        "profile.target_sd_c" => profile.target_sd_c,
        "profile.gradient_mean" => profile.gradient_mean,
        "profile.gradient_sd" => profile.gradient_sd,
        "profile.sample_period_min" => profile.sample_period_min,
        "material.c1" => material.c1,
        "material.c2" => material.c2,
        "material.c3" => material.c3,
        "material.c4" => material.c4,
        "material.e_mod_cold_gpa" => material.e_mod_cold_gpa,
        "material.e_mod_hot_gpa" => material.e_mod_hot_gpa,
        "material.cte_solder_ppm_per_k" => material.cte_solder_ppm_per_k,
        "geometry.cte_component_ppm_per_k" => geometry.cte_component_ppm_per_k,
        "geometry.cte_board_ppm_per_k" => geometry.cte_board_ppm_per_k,
        "geometry.length_scale_ratio" => geometry.length_scale_ratio,
        "simulation.dt_s" => dt_s,
        "dataset.test_fraction" => split.test_fraction,
        "dataset.validation_fraction" => split.validation_fraction,
        "mlp.hidden_layers" => mlp.hidden_layers,
        "mlp.neurons_per_layer" => mlp.neurons_per_layer,
        "mlp.dropout_rate" => mlp.dropout_rate,
        "mlp.learning_rate" => mlp.learning_rate,
        "mlp.batch_size" => mlp.batch_size,
        "mlp.max_epochs" => mlp.max_epochs,
        "mlp.early_stop_patience" => mlp.early_stop_patience,
        "mlp.restarts" => mlp.restarts,
        "lstm.cells_block1" => lstm.cells_block1,
        "lstm.cells_block2" => lstm.cells_block2,
        "lstm.learning_rate" => lstm.learning_rate,
        "lstm.batch_size" => lstm.batch_size,
        "lstm.epochs" => lstm.epochs,
        "lstm.sequence_length_min" => lstm.sequence_length_min,
        "lstm.overlap" => lstm.overlap,
        "lstm.restarts" => lstm.restarts,
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = self.scalar_entries();
        out.insert(2, ("out_dir", self.out_dir.display().to_string()));
        let vols = self.geometry.elements.iter().map(|e| e.volume);
        let levers = self.geometry.elements.iter().map(|e| e.lever_scale);
        out.push(("geometry.element_volumes", format_list(vols)));
        out.push(("geometry.element_lever_scales", format_list(levers)));
        out.push(("dataset.fractions", format_list(self.fractions.iter().copied())));
        out.push((
            "dataset.seq_lengths_min",
            format_list(self.seq_lengths_min.iter().copied()),
        ));
        out
    }

    /// Parses config text. Unset keys keep their defaults; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut volumes = None;
        let mut levers = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let err = |msg| ConfigError::Parse { line, msg };
            if let Some(r) = cfg.set_scalar(key, value) {
                r.map_err(err)?;
                continue;
            }
            match key {
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "geometry.element_volumes" => volumes = Some(parse_list(key, value).map_err(err)?),
                "geometry.element_lever_scales" => levers = Some(parse_list(key, value).map_err(err)?),
                "dataset.fractions" => cfg.fractions = parse_list(key, value).map_err(err)?,
                "dataset.seq_lengths_min" => cfg.seq_lengths_min = parse_list(key, value).map_err(err)?,
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        if volumes.is_some() || levers.is_some() {
            let defaults = &cfg.geometry.elements;
            let volumes = volumes.unwrap_or_else(|| defaults.iter().map(|e| e.volume).collect());
            let levers = levers.unwrap_or_else(|| defaults.iter().map(|e| e.lever_scale).collect());
            if volumes.len() != levers.len() {
                return Err(ConfigError::Invalid(format!(
                    "{} element volumes but {} lever scales",
                    volumes.len(),
                    levers.len()
                )));
            }
            cfg.geometry.elements = volumes
                .into_iter()
                .zip(levers)
                .map(|(volume, lever_scale)| StandoffElement {
                    volume,
                    lever_scale,
                })
                .collect();
        }
        Ok(cfg)
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (key, value) in self.entries() {
            let sec = key.split_once('.').map_or("", |(s, _)| s);
            if sec != section {
                out.push('\n');
                section = sec;
            }
            let _ = writeln!(out, "{key} = {value}");
        }
        out.trim_start().to_string()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        if self.config_version != CONFIG_VERSION {
            return Err(ConfigError::Invalid(format!(
                "config_version {} not recognized (expected {CONFIG_VERSION})",
                self.config_version
            )));
        }
        self.profile.validate().map_err(|e| invalid(&e))?;
        self.material.validate().map_err(|e| invalid(&e))?;
        self.geometry.validate().map_err(|e| invalid(&e))?;
        self.split.validate().map_err(|e| invalid(&e))?;
        self.mlp.validate().map_err(|e| invalid(&e))?;
        self.lstm.validate().map_err(|e| invalid(&e))?;
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(ConfigError::Invalid("simulation.dt_s must be positive".into()));
        }
        if self.fractions.is_empty()
            || self.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0))
            || self.fractions.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ConfigError::Invalid(
                "dataset.fractions must be ascending values in (0, 1]".into(),
            ));
        }
        SequenceParams::new(
            self.lstm.sequence_length_min,
            self.lstm.overlap,
            self.profile.sample_period_min,
        )
        .map_err(|e| invalid(&e))?;
        for &len in &self.seq_lengths_min {
            SequenceParams::new(len, self.lstm.overlap, self.profile.sample_period_min)
                .map_err(|e| invalid(&e))?;
        }
        Ok(())
    }

    /// Profile settings with the derived profile seed.
    pub fn profile_spec(&self) -> ProfileSpec {
        ProfileSpec {
            seed: derive_seed(self.seed, "profile"),
            ..self.profile.clone()
        }
    }

    pub fn mlp_config(&self, fraction: f64) -> MlpConfig {
        MlpConfig {
            seed: derive_seed(self.seed, &training_purpose(ModelKind::Mlp, fraction, None)),
            ..self.mlp.clone()
        }
    }

    /// LSTM settings for one sweep point; `seq_len_min` overrides the window length.
    pub fn lstm_config(&self, fraction: f64, seq_len_min: Option<f64>) -> LstmConfig {
        let len = seq_len_min.unwrap_or(self.lstm.sequence_length_min);
        LstmConfig {
            seed: derive_seed(
                self.seed,
                &training_purpose(ModelKind::Lstm, fraction, Some(len)),
            ),
            sequence_length_min: len,
            ..self.lstm.clone()
        }
    }

    /// Hex digest of the canonical text, for tagging reports.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn training_purpose(kind: ModelKind, fraction: f64, seq_len_min: Option<f64>) -> String {
    match seq_len_min {
        Some(len) => format!("train/{kind}/fraction={fraction}/seqlen={len}"),
        None => format!("train/{kind}/fraction={fraction}"),
    }
}

/// Child seed for a named purpose: the first 8 bytes of
/// `sha256(master_le_bytes || purpose)`, little endian.
pub fn derive_seed(master: u64, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(purpose.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_text();
        assert!(text.contains("mlp.batch_size = 512\n"));
        assert!(text.contains("dataset.fractions = 0.03125, 0.0625, 0.125, 0.25, 0.5, 1\n"));
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn comments_overrides_and_errors() {
        let cfg = ExperimentConfig::parse(
            "# run\nseed = 7 # master\n\nprofile.n_half_cycles=12\nmaterial.c4 = -4000.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.profile.n_half_cycles, 12);
        assert_eq!(cfg.material.c4, -4000.5);
        assert_eq!(
            ExperimentConfig::parse("a = 1"),
            Err(ConfigError::UnknownKey {
                line: 1,
                key: "a".into()
            })
        );
        assert!(matches!(
            ExperimentConfig::parse("\nseed 3"),
            Err(ConfigError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("mlp.batch_size = big"),
            Err(ConfigError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn validation() {
        let bad = |text: &str| ExperimentConfig::parse(text).unwrap().validate().is_err();
        assert!(bad("config_version = 2"));
        assert!(bad("dataset.fractions = 0.5, 0.25"));
        assert!(bad("dataset.fractions = 0, 1"));
        assert!(bad("dataset.seq_lengths_min = 0.5"));
        assert!(bad("lstm.cells_block1 = 20"));
        assert!(bad("mlp.dropout_rate = 1"));
        assert!(!bad("dataset.fractions = 0.125, 0.5, 1"));
    }

    #[test]
    fn seeds_depend_on_purpose_only() {
        assert_eq!(derive_seed(1, "profile"), derive_seed(1, "profile"));
        assert_ne!(derive_seed(1, "profile"), derive_seed(2, "profile"));
        assert_ne!(derive_seed(1, "profile"), derive_seed(1, "profile2"));
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            fractions: vec![0.5, 1.0],
            ..a.clone()
        };
        assert_eq!(a.mlp_config(0.5).seed, b.mlp_config(0.5).seed);
        assert_ne!(a.mlp_config(0.5).seed, a.mlp_config(1.0).seed);
    }
}
