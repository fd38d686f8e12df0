//! Model-ready datasets built from a profile and its creep records.
//!
//! Targets are log-scaled (`-ln` for the per-half-cycle MLP data, `-log10` for
//! windowed LSTM data) because increments span many decades. Splits are
//! chronological: the final 20 % of the half-cycles form the test partition and
//! the last 20 % of the remaining training side is held out for validation.
//! Standardizers are always fitted on the train partition alone.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::creepsim::CreepRecord;
use crate::csvio::{self, CsvError};
use crate::profilegen::{cycle_start_times, HalfCycle, TemperatureTrace};

/// Exact-zero increments are raised to this value before log scaling.
pub const INCREMENT_FLOOR: f64 = 1e-16;
/// Smallest training side accepted after fraction segmentation.
pub const MIN_SEGMENT_SAMPLES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("increment must be positive, got {0}")]
    NonPositiveIncrement(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("window of {window} samples does not fit a partition of {available} samples")]
    WindowTooLong { window: usize, available: usize },
    #[error("segment keeps {kept} samples, fewer than {MIN_SEGMENT_SAMPLES}")]
    EmptyResult { kept: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("io: {0}")]
    Io(String),
    #[error("sidecar: {0}")]
    Sidecar(String),
}

impl From<std::io::Error> for DatasetError {
    fn from(e: std::io::Error) -> Self {
        DatasetError::Io(e.to_string())
    }
}

pub fn floor_increment(increment: f64) -> f64 {
    increment.max(INCREMENT_FLOOR)
}

fn check_positive(increment: f64) -> Result<(), DatasetError> {
    if increment > 0.0 && increment.is_finite() {
        Ok(())
    } else {
        Err(DatasetError::NonPositiveIncrement(increment))
    }
}

/// `-ln(increment)`.
pub fn transform_target_ln(increment: f64) -> Result<f64, DatasetError> {
    check_positive(increment)?;
    Ok(-increment.ln())
}

pub fn inverse_transform_ln(value: f64) -> f64 {
    (-value).exp()
}

/// `-log10(increment)`.
pub fn transform_target_log10(increment: f64) -> Result<f64, DatasetError> {
    check_positive(increment)?;
    Ok(-increment.log10())
}

pub fn inverse_transform_log10(value: f64) -> f64 {
    10f64.powf(-value)
}

/// Per-dimension affine map to zero mean and unit deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub deviations: Vec<f64>,
}

impl Standardizer {
    /// Fits population statistics over `rows`, each of length `dims`.
    ///
    /// A dimension without spread gets deviation 1 so the map stays invertible.
    pub fn fit<'a, I>(rows: I, dims: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]> + Clone,
    {
        let mut n = 0usize;
        let mut sums = vec![0.0; dims];
        for row in rows.clone() {
            n += 1;
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        let count = n.max(1) as f64;
        let means: Vec<f64> = sums.iter().map(|s| s / count).collect();
        let mut sq = vec![0.0; dims];
        for row in rows {
            for ((q, v), m) in sq.iter_mut().zip(row).zip(&means) {
                *q += (v - m) * (v - m);
            }
        }
        let deviations = sq
            .iter()
            .map(|q| {
                let sd = (q / count).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, deviations }
    }

    /// Scalar statistics shared by every element of `values`.
    pub fn fit_scalar<I>(values: I) -> Self
    where
        I: IntoIterator<Item = f64> + Clone,
    {
        let rows: Vec<[f64; 1]> = values.into_iter().map(|v| [v]).collect();
        Self::fit(rows.iter().map(|r| &r[..]), 1)
    }

    pub fn dims(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(i, v)| {
                let d = i % self.dims();
                (v - self.means[d]) / self.deviations[d]
            })
            .collect()
    }

    pub fn inverse(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(i, v)| {
                let d = i % self.dims();
                v * self.deviations[d] + self.means[d]
            })
            .collect()
    }

    pub fn transform_scalar(&self, v: f64) -> f64 {
        (v - self.means[0]) / self.deviations[0]
    }

    pub fn inverse_scalar(&self, v: f64) -> f64 {
        v * self.deviations[0] + self.means[0]
    }
}

/// Chronological split ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub validation_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            validation_fraction: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let ok = |f: f64| f > 0.0 && f < 1.0;
        if ok(self.test_fraction) && ok(self.validation_fraction) {
            Ok(())
        } else {
            Err(DatasetError::InvalidParameter(
                "split fractions must lie in (0, 1)".into(),
            ))
        }
    }

    /// Number of leading half-cycles on the training side.
    pub fn training_side_cycles(&self, n_cycles: usize) -> usize {
        ((1.0 - self.test_fraction) * n_cycles as f64).round() as usize
    }

    fn validation_count(&self, n_side: usize) -> usize {
        (self.validation_fraction * n_side as f64).round() as usize
    }
}

/// Behaviour shared by MLP and LSTM samples.
pub trait Sample: Clone {
    /// Start of the covered interval in minutes from the profile start.
    fn start_min(&self) -> f64;
    /// End of the covered interval in minutes.
    fn end_min(&self) -> f64;
    fn fit_standardizers(train: &[Self]) -> (Standardizer, Option<Standardizer>);
    fn standardize(&mut self, features: &Standardizer, target: Option<&Standardizer>);
    /// Standardized network input.
    fn inputs(&self) -> &[f64];
    /// Target in the space the network is trained on.
    fn target(&self) -> f64;
}

/// One half-cycle as a value-to-value example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSample {
    pub cycle_index: usize,
    pub start_min: f64,
    pub dwell_min: f64,
    /// (t_start, t_target, ΔT, Ṫ_max, dwell) before standardization.
    pub raw_features: [f64; 5],
    pub features: [f64; 5],
    /// Floored creep increment.
    pub increment: f64,
    /// `-ln(increment)`; the MLP target is not standardized.
    pub target: f64,
}

impl MlpSample {
    pub fn new(cycle_index: usize, start_min: f64, hc: &HalfCycle, increment: f64) -> Self {
        let raw_features = [
            hc.t_start_c,
            hc.t_target_c,
            hc.delta_t_k,
            hc.t_dot_max,
            hc.dwell_min,
        ];
        let increment = floor_increment(increment);
        Self {
            cycle_index,
            start_min,
            dwell_min: hc.dwell_min,
            raw_features,
            features: raw_features,
            increment,
            target: -increment.ln(),
        }
    }
}

impl Sample for MlpSample {
    fn start_min(&self) -> f64 {
        self.start_min
    }

    fn end_min(&self) -> f64 {
        self.start_min + self.dwell_min
    }

    fn fit_standardizers(train: &[Self]) -> (Standardizer, Option<Standardizer>) {
        let rows = train.iter().map(|s| &s.raw_features[..]);
        (Standardizer::fit(rows, 5), None)
    }

    fn standardize(&mut self, features: &Standardizer, _target: Option<&Standardizer>) {
        let z = features.transform(&self.raw_features);
        self.features.copy_from_slice(&z);
    }

    fn inputs(&self) -> &[f64] {
        &self.features
    }

    fn target(&self) -> f64 {
        self.target
    }
}

/// One temperature window as a sequence-to-value example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmSample {
    pub start_sample: usize,
    pub sample_period_min: f64,
    pub raw_sequence: Vec<f64>,
    pub sequence: Vec<f64>,
    /// Floored sum of the increments attributed to the window.
    pub window_sum: f64,
    /// `-log10(window_sum)`.
    pub raw_target: f64,
    pub target: f64,
}

impl Sample for LstmSample {
    fn start_min(&self) -> f64 {
        self.start_sample as f64 * self.sample_period_min
    }

    fn end_min(&self) -> f64 {
        (self.start_sample + self.raw_sequence.len()) as f64 * self.sample_period_min
    }

    fn fit_standardizers(train: &[Self]) -> (Standardizer, Option<Standardizer>) {
        let temps = train.iter().flat_map(|s| s.raw_sequence.iter().copied());
        let features = Standardizer::fit_scalar(temps);
        let targets = Standardizer::fit_scalar(train.iter().map(|s| s.raw_target));
        (features, Some(targets))
    }

    fn standardize(&mut self, features: &Standardizer, target: Option<&Standardizer>) {
        self.sequence = self
            .raw_sequence
            .iter()
            .map(|&t| features.transform_scalar(t))
            .collect();
        self.target = match target {
            Some(t) => t.transform_scalar(self.raw_target),
            None => self.raw_target,
        };
    }

    fn inputs(&self) -> &[f64] {
        &self.sequence
    }

    fn target(&self) -> f64 {
        self.target
    }
}

/// Windowing parameters of an LSTM dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceParams {
    pub sequence_length_min: f64,
    pub overlap: f64,
    pub sample_period_min: f64,
    /// Window length in samples.
    pub window: usize,
    /// Training-window stride in samples. Test windows always tile with stride `window`.
    pub stride: usize,
}

impl SequenceParams {
    pub fn new(
        sequence_length_min: f64,
        overlap: f64,
        sample_period_min: f64,
    ) -> Result<Self, DatasetError> {
        if !(0.0..1.0).contains(&overlap) {
            return Err(DatasetError::InvalidParameter(format!(
                "overlap {overlap} outside [0, 1)"
            )));
        }
        if !(sample_period_min > 0.0) || !(sequence_length_min >= sample_period_min) {
            return Err(DatasetError::InvalidParameter(format!(
                "sequence length {sequence_length_min} min shorter than the {sample_period_min} min sample period"
            )));
        }
        let window = (sequence_length_min / sample_period_min).round() as usize;
        let stride = ((window as f64 * (1.0 - overlap)).floor() as usize).max(1);
        Ok(Self {
            sequence_length_min,
            overlap,
            sample_period_min,
            window,
            stride,
        })
    }
}

/// Train/validation/test partitions with their fitted standardizers.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle<S> {
    pub train: Vec<S>,
    pub validation: Vec<S>,
    pub test: Vec<S>,
    /// Share of the full training side kept in `train` + `validation`.
    pub fraction: f64,
    pub feature_standardizer: Standardizer,
    pub target_standardizer: Option<Standardizer>,
    pub split: SplitSpec,
    /// Present for LSTM bundles.
    pub sequence: Option<SequenceParams>,
}

impl<S: Sample> DatasetBundle<S> {
    fn assemble(
        training_side: Vec<S>,
        mut test: Vec<S>,
        split: SplitSpec,
        fraction: f64,
        sequence: Option<SequenceParams>,
    ) -> Self {
        let n_val = split.validation_count(training_side.len());
        let n_train = training_side.len() - n_val;
        let mut train = training_side;
        let mut validation = train.split_off(n_train);
        let (features, target) = S::fit_standardizers(&train);
        for s in train.iter_mut().chain(&mut validation).chain(&mut test) {
            s.standardize(&features, target.as_ref());
        }
        Self {
            train,
            validation,
            test,
            fraction,
            feature_standardizer: features,
            target_standardizer: target,
            split,
            sequence,
        }
    }

    /// Train followed by validation, in chronological order.
    pub fn training_side(&self) -> impl Iterator<Item = &S> {
        self.train.iter().chain(&self.validation)
    }

    /// Duration covered by the training side in hours.
    pub fn training_hours(&self) -> f64 {
        let start = self.training_side().map(S::start_min).fold(f64::INFINITY, f64::min);
        let end = self.training_side().map(S::end_min).fold(f64::NEG_INFINITY, f64::max);
        if end > start {
            (end - start) / 60.0
        } else {
            0.0
        }
    }
}

/// One example per half-cycle, split chronologically.
pub fn build_mlp_dataset(
    cycles: &[HalfCycle],
    records: &[CreepRecord],
    split: SplitSpec,
) -> Result<DatasetBundle<MlpSample>, DatasetError> {
    split.validate()?;
    if cycles.len() != records.len() {
        return Err(DatasetError::LengthMismatch {
            left: cycles.len(),
            right: records.len(),
        });
    }
    let starts = cycle_start_times(cycles);
    let mut samples: Vec<MlpSample> = cycles
        .iter()
        .zip(records)
        .enumerate()
        .map(|(k, (hc, r))| MlpSample::new(k, starts[k], hc, r.increment))
        .collect();
    let n_side = split.training_side_cycles(samples.len());
    if n_side == 0 || n_side == samples.len() {
        return Err(DatasetError::InvalidParameter(format!(
            "{} half-cycles cannot be split into non-empty partitions",
            samples.len()
        )));
    }
    let test = samples.split_off(n_side);
    Ok(DatasetBundle::assemble(samples, test, split, 1.0, None))
}

/// Windows over `[from, to)` with the given stride.
fn windows(
    trace: &TemperatureTrace,
    midpoints: &[f64],
    records: &[CreepRecord],
    params: &SequenceParams,
    from: usize,
    to: usize,
    stride: usize,
) -> Result<Vec<LstmSample>, DatasetError> {
    if to < from + params.window {
        return Err(DatasetError::WindowTooLong {
            window: params.window,
            available: to.saturating_sub(from),
        });
    }
    let dt = trace.sample_period_min;
    let mut out = Vec::new();
    let mut s = from;
    while s + params.window <= to {
        let lo = s as f64 * dt;
        let hi = (s + params.window) as f64 * dt;
        let first = midpoints.partition_point(|&m| m < lo);
        let last = midpoints.partition_point(|&m| m < hi);
        let sum: f64 = records[first..last].iter().map(|r| r.increment).sum();
        let window_sum = floor_increment(sum);
        let raw_sequence = trace.temps_c[s..s + params.window].to_vec();
        let raw_target = -window_sum.log10();
        out.push(LstmSample {
            start_sample: s,
            sample_period_min: dt,
            sequence: raw_sequence.clone(),
            raw_sequence,
            window_sum,
            raw_target,
            target: raw_target,
        });
        s += stride;
    }
    Ok(out)
}

/// Fixed-length temperature windows with the summed creep of the half-cycles
/// whose dwell midpoint falls inside each window.
///
/// Training-side windows stride by `window · (1 - overlap)` samples (floored);
/// test windows tile the test partition without overlap. No window crosses the
/// train/test boundary, which is the first sample of the first test half-cycle.
pub fn build_lstm_dataset(
    trace: &TemperatureTrace,
    cycles: &[HalfCycle],
    records: &[CreepRecord],
    sequence_length_min: f64,
    overlap: f64,
    split: SplitSpec,
) -> Result<DatasetBundle<LstmSample>, DatasetError> {
    split.validate()?;
    if cycles.len() != records.len() {
        return Err(DatasetError::LengthMismatch {
            left: cycles.len(),
            right: records.len(),
        });
    }
    if trace.cycle_boundaries.len() != cycles.len() {
        return Err(DatasetError::LengthMismatch {
            left: trace.cycle_boundaries.len(),
            right: cycles.len(),
        });
    }
    let params = SequenceParams::new(sequence_length_min, overlap, trace.sample_period_min)?;
    let midpoints: Vec<f64> = cycle_start_times(cycles)
        .iter()
        .zip(cycles)
        .map(|(s, hc)| s + 0.5 * hc.dwell_min)
        .collect();
    let n_side = split.training_side_cycles(cycles.len());
    if n_side == 0 || n_side == cycles.len() {
        return Err(DatasetError::InvalidParameter(format!(
            "{} half-cycles cannot be split into non-empty partitions",
            cycles.len()
        )));
    }
    let boundary = trace.cycle_boundaries[n_side];
    let training_side = windows(trace, &midpoints, records, &params, 0, boundary, params.stride)?;
    let test = windows(trace, &midpoints, records, &params, boundary, trace.len(), params.window)?;
    Ok(DatasetBundle::assemble(
        training_side,
        test,
        split,
        1.0,
        Some(params),
    ))
}

/// Keeps the chronological prefix `⌈fraction · N⌉` of the training side,
/// re-splits it into train/validation and refits the standardizers.
///
/// The test partition keeps its raw values and is re-standardized with the new
/// statistics.
pub fn segment_training_fraction<S: Sample>(
    bundle: &DatasetBundle<S>,
    fraction: f64,
) -> Result<DatasetBundle<S>, DatasetError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DatasetError::InvalidParameter(format!(
            "fraction {fraction} outside (0, 1]"
        )));
    }
    let side: Vec<S> = bundle.training_side().cloned().collect();
    let kept = ((fraction * side.len() as f64).ceil() as usize).min(side.len());
    if kept < MIN_SEGMENT_SAMPLES {
        return Err(DatasetError::EmptyResult { kept });
    }
    let prefix = side[..kept].to_vec();
    Ok(DatasetBundle::assemble(
        prefix,
        bundle.test.clone(),
        bundle.split,
        bundle.fraction * fraction,
        bundle.sequence,
    ))
}

// ---------------------------------------------------------------------------
// Export / import
// ---------------------------------------------------------------------------

/// JSON sidecar stored next to the partition CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub version: u32,
    pub kind: String,
    pub fraction: f64,
    pub split: SplitSpec,
    pub feature_standardizer: Standardizer,
    pub target_standardizer: Option<Standardizer>,
    pub sequence: Option<SequenceParams>,
    pub counts: BTreeMap<String, usize>,
    /// Seeds that produced the underlying data, keyed by purpose.
    pub provenance: BTreeMap<String, u64>,
}

pub const SIDECAR_VERSION: u32 = 1;
pub const SIDECAR_FILE: &str = "dataset.json";
pub const PARTITIONS: [&str; 3] = ["train", "validation", "test"];

const MLP_HEADER: &str =
    "cycle_index,start_min,t_start_C,t_target_C,delta_t_K,t_dot_max,dwell_min,increment,target";

/// CSV encoding of a sample kind.
pub trait CsvSample: Sample {
    const KIND: &'static str;
    fn header(window: usize) -> String;
    fn row(&self) -> String;
    fn from_row(row: &[f64], sample_period_min: f64) -> Self;
}

impl CsvSample for MlpSample {
    const KIND: &'static str = "mlp";

    fn header(_window: usize) -> String {
        MLP_HEADER.to_string()
    }

    fn row(&self) -> String {
        let f = &self.raw_features;
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.cycle_index, self.start_min, f[0], f[1], f[2], f[3], f[4], self.increment, self.target
        )
    }

    fn from_row(r: &[f64], _sample_period_min: f64) -> Self {
        let raw_features = [r[2], r[3], r[4], r[5], r[6]];
        Self {
            cycle_index: r[0] as usize,
            start_min: r[1],
            dwell_min: r[6],
            raw_features,
            features: raw_features,
            increment: r[7],
            target: r[8],
        }
    }
}

impl CsvSample for LstmSample {
    const KIND: &'static str = "lstm";

    fn header(window: usize) -> String {
        let mut h = String::from("start_sample,window_sum,target");
        for i in 0..window {
            h.push_str(&format!(",t{i}"));
        }
        h
    }

    fn row(&self) -> String {
        let mut line = format!("{},{:e},{:e}", self.start_sample, self.window_sum, self.raw_target);
        for t in &self.raw_sequence {
            line.push_str(&format!(",{t:e}"));
        }
        line
    }

    fn from_row(r: &[f64], sample_period_min: f64) -> Self {
        let raw_sequence = r[3..].to_vec();
        Self {
            start_sample: r[0] as usize,
            sample_period_min,
            sequence: raw_sequence.clone(),
            raw_sequence,
            window_sum: r[1],
            raw_target: r[2],
            target: r[2],
        }
    }
}

/// Writes `train.csv`, `validation.csv`, `test.csv` and the JSON sidecar into `dir`.
///
/// Partition files hold raw (unstandardized) values; the sidecar carries the
/// statistics needed to standardize them.
pub fn write_bundle<S: CsvSample>(
    dir: &Path,
    bundle: &DatasetBundle<S>,
    provenance: &BTreeMap<String, u64>,
) -> Result<(), DatasetError> {
    let window = bundle.sequence.map(|p| p.window).unwrap_or(0);
    let mut counts = BTreeMap::new();
    for (name, part) in PARTITIONS
        .iter()
        .zip([&bundle.train, &bundle.validation, &bundle.test])
    {
        let mut text = S::header(window);
        text.push('\n');
        for s in part {
            text.push_str(&s.row());
            text.push('\n');
        }
        csvio::write_atomic(&dir.join(format!("{name}.csv")), text.as_bytes())?;
        counts.insert(name.to_string(), part.len());
    }
    let sidecar = DatasetSidecar {
        version: SIDECAR_VERSION,
        kind: S::KIND.to_string(),
        fraction: bundle.fraction,
        split: bundle.split,
        feature_standardizer: bundle.feature_standardizer.clone(),
        target_standardizer: bundle.target_standardizer.clone(),
        sequence: bundle.sequence,
        counts,
        provenance: provenance.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| DatasetError::Sidecar(e.to_string()))?;
    csvio::write_atomic(&dir.join(SIDECAR_FILE), json.as_bytes())?;
    Ok(())
}

/// Reads a bundle written by [`write_bundle`].
pub fn read_bundle<S: CsvSample>(dir: &Path) -> Result<(DatasetBundle<S>, DatasetSidecar), DatasetError> {
    let text = fs::read_to_string(dir.join(SIDECAR_FILE))?;
    let sidecar: DatasetSidecar =
        serde_json::from_str(&text).map_err(|e| DatasetError::Sidecar(e.to_string()))?;
    if sidecar.version != SIDECAR_VERSION || sidecar.kind != S::KIND {
        return Err(DatasetError::Sidecar(format!(
            "expected {} sidecar version {SIDECAR_VERSION}, found {} version {}",
            S::KIND,
            sidecar.kind,
            sidecar.version
        )));
    }
    let window = sidecar.sequence.map(|p| p.window).unwrap_or(0);
    let period = sidecar.sequence.map(|p| p.sample_period_min).unwrap_or(0.0);
    let header = S::header(window);
    let mut parts = Vec::new();
    for name in PARTITIONS {
        let file = fs::File::open(dir.join(format!("{name}.csv")))?;
        let rows = csvio::read_numeric(std::io::BufReader::new(file), &header)?;
        let mut samples: Vec<S> = rows.iter().map(|r| S::from_row(r, period)).collect();
        for s in &mut samples {
            s.standardize(&sidecar.feature_standardizer, sidecar.target_standardizer.as_ref());
        }
        parts.push(samples);
    }
    let test = parts.pop().unwrap_or_default();
    let validation = parts.pop().unwrap_or_default();
    let train = parts.pop().unwrap_or_default();
    let bundle = DatasetBundle {
        train,
        validation,
        test,
        fraction: sidecar.fraction,
        feature_standardizer: sidecar.feature_standardizer.clone(),
        target_standardizer: sidecar.target_standardizer.clone(),
        split: sidecar.split,
        sequence: sidecar.sequence,
    };
    Ok((bundle, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profilegen::{derive_half_cycle, render_trace};

    fn toy_cycles(n: usize) -> Vec<HalfCycle> {
        let mut out = Vec::new();
        let mut start = 20.0;
        for k in 0..n {
            let target = if k % 2 == 0 { 90.0 + k as f64 } else { -10.0 + k as f64 };
            let hc = derive_half_cycle(start, target, 5.0 + (k % 3) as f64).unwrap();
            start = target;
            out.push(hc);
        }
        out
    }

    fn toy_records(n: usize) -> Vec<CreepRecord> {
        let mut total = 0.0;
        (0..n)
            .map(|k| {
                let increment = 10f64.powi(-3 - (k % 7) as i32);
                total += increment;
                CreepRecord { cycle_index: k, increment, running_total: total }
            })
            .collect()
    }

    #[test]
    fn log_transforms() {
        assert_eq!(transform_target_ln(1.0).unwrap(), 0.0);
        assert!((transform_target_ln(8e-14).unwrap() - 30.157).abs() < 1e-3);
        assert!((transform_target_log10(1e-3).unwrap() - 3.0).abs() < 1e-15);
        assert!((transform_target_log10(6e-3).unwrap() - 2.2218).abs() < 1e-4);
        assert!(matches!(transform_target_ln(0.0), Err(DatasetError::NonPositiveIncrement(_))));
        assert!(transform_target_log10(-1e-9).is_err());
        for k in 0..=120 {
            let x = 10f64.powf(-14.0 + k as f64 * 0.1);
            let a = inverse_transform_ln(transform_target_ln(x).unwrap());
            let b = inverse_transform_log10(transform_target_log10(x).unwrap());
            assert!((a - x).abs() / x < 1e-12);
            assert!((b - x).abs() / x < 1e-12);
        }
    }

    #[test]
    fn zero_increments_are_floored() {
        let hc = derive_half_cycle(20.0, 60.0, 5.0).unwrap();
        let s = MlpSample::new(0, 0.0, &hc, 0.0);
        assert_eq!(s.increment, INCREMENT_FLOOR);
        assert!((s.target - 16.0 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn standardizer_roundtrip_and_constant_dims() {
        let rows = [vec![1.0, 5.0], vec![3.0, 5.0], vec![8.0, 5.0]];
        let st = Standardizer::fit(rows.iter().map(|r| &r[..]), 2);
        assert_eq!(st.deviations[1], 1.0);
        for r in &rows {
            let back = st.inverse(&st.transform(r));
            for (a, b) in back.iter().zip(r) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mlp_split_arithmetic() {
        let cycles = toy_cycles(10);
        let b = build_mlp_dataset(&cycles, &toy_records(10), SplitSpec::default()).unwrap();
        assert_eq!(b.train.len() + b.validation.len(), 8);
        assert_eq!(b.test.len(), 2);
        assert_eq!(b.validation.len(), 2);
        assert_eq!(b.test[0].cycle_index, 8);
        // the target is -ln(increment), not standardized
        assert!((b.test[0].target - (-b.test[0].increment.ln())).abs() < 1e-15);
        assert!(matches!(
            build_mlp_dataset(&cycles, &toy_records(9), SplitSpec::default()),
            Err(DatasetError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mlp_standardization_uses_train_only() {
        let cycles = toy_cycles(60);
        let b = build_mlp_dataset(&cycles, &toy_records(60), SplitSpec::default()).unwrap();
        for d in 0..5 {
            let n = b.train.len() as f64;
            let mean: f64 = b.train.iter().map(|s| s.features[d]).sum::<f64>() / n;
            let var: f64 = b.train.iter().map(|s| (s.features[d] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
        let test_mean: f64 = b.test.iter().map(|s| s.features[0]).sum::<f64>() / b.test.len() as f64;
        assert!(test_mean.abs() > 1e-6);
    }

    #[test]
    fn stride_from_overlap() {
        let p = SequenceParams::new(165.0, 0.75, 1.0).unwrap();
        assert_eq!((p.window, p.stride), (165, 41));
        let p = SequenceParams::new(165.0, 0.0, 1.0).unwrap();
        assert_eq!(p.stride, 165);
        assert!(SequenceParams::new(0.5, 0.0, 1.0).is_err());
        assert!(SequenceParams::new(10.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lstm_windows_respect_boundary_and_tiling() {
        let cycles = toy_cycles(40);
        let trace = render_trace(&cycles, 1.0);
        let recs = toy_records(40);
        let b = build_lstm_dataset(&trace, &cycles, &recs, 30.0, 0.0, SplitSpec::default()).unwrap();
        let boundary = trace.cycle_boundaries[32];
        for s in b.training_side() {
            assert!(s.start_sample + 30 <= boundary);
        }
        let side: Vec<_> = b.training_side().collect();
        for w in side.windows(2) {
            assert_eq!(w[1].start_sample, w[0].start_sample + 30);
        }
        assert_eq!(b.test[0].start_sample, boundary);
        for w in b.test.windows(2) {
            assert_eq!(w[1].start_sample, w[0].start_sample + 30);
        }
        let t = b.target_standardizer.as_ref().unwrap();
        for s in b.training_side().chain(&b.test) {
            assert!((t.inverse_scalar(s.target) - s.raw_target).abs() < 1e-12);
            assert_eq!(s.sequence.len(), 30);
        }
    }

    #[test]
    fn window_with_single_midpoint_takes_that_increment() {
        let cycles = toy_cycles(20);
        let trace = render_trace(&cycles, 1.0);
        let recs = toy_records(20);
        let starts = cycle_start_times(&cycles);
        // a window that exactly covers cycle 3
        let lo = starts[3].ceil() as usize;
        let hi = (starts[3] + cycles[3].dwell_min).floor() as usize;
        let mids: Vec<f64> = starts.iter().zip(&cycles).map(|(s, c)| s + 0.5 * c.dwell_min).collect();
        let params = SequenceParams::new((hi - lo) as f64, 0.0, 1.0).unwrap();
        let w = windows(&trace, &mids, &recs, &params, lo, hi, params.window).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].raw_target - transform_target_log10(recs[3].increment).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn window_too_long() {
        let cycles = toy_cycles(10);
        let trace = render_trace(&cycles, 1.0);
        let r = build_lstm_dataset(&trace, &cycles, &toy_records(10), 1e5, 0.5, SplitSpec::default());
        assert!(matches!(r, Err(DatasetError::WindowTooLong { .. })));
    }

    #[test]
    fn fraction_segmentation() {
        let cycles = toy_cycles(100);
        let b = build_mlp_dataset(&cycles, &toy_records(100), SplitSpec::default()).unwrap();
        let full = segment_training_fraction(&b, 1.0).unwrap();
        assert_eq!(full, b);
        let half = segment_training_fraction(&b, 0.5).unwrap();
        assert_eq!(half.train.len() + half.validation.len(), 40);
        assert_eq!(half.fraction, 0.5);
        assert_eq!(half.test.len(), b.test.len());
        assert!(matches!(
            segment_training_fraction(&b, 0.1),
            Err(DatasetError::EmptyResult { kept: 8 })
        ));
        assert!(segment_training_fraction(&b, 0.0).is_err());
        assert!(segment_training_fraction(&b, 1.5).is_err());
    }

    #[test]
    fn bundle_files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cycles = toy_cycles(40);
        let trace = render_trace(&cycles, 1.0);
        let recs = toy_records(40);
        let mut prov = BTreeMap::new();
        prov.insert("profile".to_string(), 7u64);

        let mlp = build_mlp_dataset(&cycles, &recs, SplitSpec::default()).unwrap();
        write_bundle(&dir.path().join("mlp"), &mlp, &prov).unwrap();
        let (back, side) = read_bundle::<MlpSample>(&dir.path().join("mlp")).unwrap();
        assert_eq!(back, mlp);
        assert_eq!(side.provenance["profile"], 7);

        let lstm = build_lstm_dataset(&trace, &cycles, &recs, 20.0, 0.5, SplitSpec::default()).unwrap();
        write_bundle(&dir.path().join("lstm"), &lstm, &prov).unwrap();
        let (back, _) = read_bundle::<LstmSample>(&dir.path().join("lstm")).unwrap();
        assert_eq!(back, lstm);
        assert!(read_bundle::<LstmSample>(&dir.path().join("mlp")).is_err());
    }
}
