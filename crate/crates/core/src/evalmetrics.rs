//! Goodness-of-fit in log space and relative error of reconstructed creep histories.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio::write_atomic;
use crate::datasets::{
    inverse_transform_ln, inverse_transform_log10, DatasetBundle, LstmSample, MlpSample, Sample,
    Standardizer,
};
use crate::neuralnet::{ModelKind, NetError, TrainedModel};

pub const ACCUMULATION_HEADER: &str = "index,true_accum,pred_accum,rel_err";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty series")]
    Empty,
    #[error("true values are constant, R² undefined")]
    ConstantTruth,
    #[error("log10 targets need the target standardizer")]
    MissingStandardizer,
    #[error("true accumulation is not positive at index {index}")]
    ZeroTrueAccumulation { index: usize },
    #[error("non-finite prediction at index {index}")]
    NonFinite { index: usize },
    #[error("model kind {model} does not match {data} samples")]
    KindMismatch { model: ModelKind, data: ModelKind },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("i/o: {0}")]
    Io(String),
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(y_true, y_pred)?;
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ConstantTruth);
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// How a model's output maps back to a creep increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTransform {
    /// `-ln(increment)`, unstandardized.
    Ln,
    /// `-log10(increment)`, standardized.
    Log10,
}

impl From<ModelKind> for TargetTransform {
    fn from(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Mlp => TargetTransform::Ln,
            ModelKind::Lstm => TargetTransform::Log10,
        }
    }
}

/// Creep increments recovered from model outputs, in input order.
pub fn reconstruct_increments(
    predicted: &[f64],
    kind: TargetTransform,
    standardizer: Option<&Standardizer>,
) -> Result<Vec<f64>, MetricsError> {
    if kind == TargetTransform::Log10 && standardizer.is_none() {
        return Err(MetricsError::MissingStandardizer);
    }
    predicted
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if !v.is_finite() {
                return Err(MetricsError::NonFinite { index });
            }
            let v = standardizer.map_or(v, |s| s.inverse_scalar(v));
            Ok(match kind {
                TargetTransform::Ln => inverse_transform_ln(v),
                TargetTransform::Log10 => inverse_transform_log10(v),
            })
        })
        .collect()
}

/// Running sum of reconstructed increments.
pub fn reconstruct_accumulation(
    predicted: &[f64],
    kind: TargetTransform,
    standardizer: Option<&Standardizer>,
) -> Result<Vec<f64>, MetricsError> {
    Ok(cumulative_sum(&reconstruct_increments(predicted, kind, standardizer)?))
}

pub fn cumulative_sum(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Pointwise `|(pred - true) / true|`.
pub fn relative_errors(pred_accum: &[f64], true_accum: &[f64]) -> Result<Vec<f64>, MetricsError> {
    check_lengths(pred_accum, true_accum)?;
    pred_accum
        .iter()
        .zip(true_accum)
        .enumerate()
        .map(|(index, (p, t))| {
            if !(*t > 0.0) {
                return Err(MetricsError::ZeroTrueAccumulation { index });
            }
            Ok(((p - t) / t).abs())
        })
        .collect()
}

/// Mean relative error between predicted and true accumulated histories.
pub fn f_rel_ave(pred_accum: &[f64], true_accum: &[f64]) -> Result<f64, MetricsError> {
    let errs = relative_errors(pred_accum, true_accum)?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Evaluation of one model on one test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub kind: ModelKind,
    pub r2: f64,
    pub f_rel_ave: f64,
    pub n_samples: usize,
    pub config_fingerprint: String,
    pub training_fraction: f64,
    /// Timeline position of each point: end of the half-cycle or window, minutes.
    pub time_min: Vec<f64>,
    pub true_accum: Vec<f64>,
    pub pred_accum: Vec<f64>,
    pub rel_err: Vec<f64>,
}

#[derive(Serialize)]
struct ReportSummary<'a> {
    kind: ModelKind,
    r2: f64,
    f_rel_ave: f64,
    n_samples: usize,
    config_fingerprint: &'a str,
    training_fraction: f64,
    start_min: Option<f64>,
    end_min: Option<f64>,
}

impl MetricsReport {
    /// Builds the report from true and predicted targets (model space) and the
    /// true increments; accumulation starts at zero at the first sample.
    pub fn from_predictions(
        kind: ModelKind,
        targets: &[f64],
        predictions: &[f64],
        true_increments: &[f64],
        time_min: Vec<f64>,
        target_standardizer: Option<&Standardizer>,
    ) -> Result<Self, MetricsError> {
        check_lengths(targets, predictions)?;
        check_lengths(targets, true_increments)?;
        let r2 = r2_score(targets, predictions)?;
        let pred_accum = reconstruct_accumulation(predictions, kind.into(), target_standardizer)?;
        let true_accum = cumulative_sum(true_increments);
        let rel_err = relative_errors(&pred_accum, &true_accum)?;
        let f = rel_err.iter().sum::<f64>() / rel_err.len() as f64;
        Ok(Self {
            kind,
            r2,
            f_rel_ave: f,
            n_samples: targets.len(),
            config_fingerprint: String::new(),
            training_fraction: 1.0,
            time_min,
            true_accum,
            pred_accum,
            rel_err,
        })
    }

    /// Summary JSON without the per-point series.
    pub fn summary_json(&self) -> String {
        let s = ReportSummary {
            kind: self.kind,
            r2: self.r2,
            f_rel_ave: self.f_rel_ave,
            n_samples: self.n_samples,
            config_fingerprint: &self.config_fingerprint,
            training_fraction: self.training_fraction,
            start_min: self.time_min.first().copied(),
            end_min: self.time_min.last().copied(),
        };
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }

    pub fn accumulation_csv(&self) -> String {
        let mut out = String::from(ACCUMULATION_HEADER);
        out.push('\n');
        for (i, ((t, p), e)) in self
            .true_accum
            .iter()
            .zip(&self.pred_accum)
            .zip(&self.rel_err)
            .enumerate()
        {
            out.push_str(&format!("{i},{t:.12e},{p:.12e},{e:.12e}\n"));
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>_accumulation.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(), MetricsError> {
        let io = |e: std::io::Error| MetricsError::Io(e.to_string());
        write_atomic(&dir.join(format!("{stem}.json")), self.summary_json().as_bytes()).map_err(io)?;
        write_atomic(
            &dir.join(format!("{stem}_accumulation.csv")),
            self.accumulation_csv().as_bytes(),
        )
        .map_err(io)
    }
}

/// Test samples that know their untransformed creep increment.
pub trait Evaluable: Sample {
    const KIND: ModelKind;
    fn true_increment(&self) -> f64;
}

impl Evaluable for MlpSample {
    const KIND: ModelKind = ModelKind::Mlp;
    fn true_increment(&self) -> f64 {
        self.increment
    }
}

impl Evaluable for LstmSample {
    const KIND: ModelKind = ModelKind::Lstm;
    fn true_increment(&self) -> f64 {
        self.window_sum
    }
}

/// Runs `model` over the bundle's test partition.
pub fn evaluate<S: Evaluable>(
    model: &TrainedModel,
    bundle: &DatasetBundle<S>,
) -> Result<MetricsReport, MetricsError> {
    if model.kind != S::KIND {
        return Err(MetricsError::KindMismatch {
            model: model.kind,
            data: S::KIND,
        });
    }
    let predictions = model.predict_samples(&bundle.test)?;
    let mut report = evaluate_predictions(bundle, &predictions)?;
    report.training_fraction = model.training_fraction;
    Ok(report)
}

/// Report for arbitrary predictions on the test partition, e.g. an oracle.
pub fn evaluate_predictions<S: Evaluable>(
    bundle: &DatasetBundle<S>,
    predictions: &[f64],
) -> Result<MetricsReport, MetricsError> {
    let targets: Vec<f64> = bundle.test.iter().map(Sample::target).collect();
    let increments: Vec<f64> = bundle.test.iter().map(Evaluable::true_increment).collect();
    let times = bundle.test.iter().map(Sample::end_min).collect();
    let mut report = MetricsReport::from_predictions(
        S::KIND,
        &targets,
        predictions,
        &increments,
        times,
        bundle.target_standardizer.as_ref(),
    )?;
    report.training_fraction = bundle.fraction;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_values() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(r2_score(&y, &y).unwrap(), 1.0);
        assert_eq!(r2_score(&y, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(r2_score(&y, &[1.0, 2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(r2_score(&[4.0, 4.0], &[1.0, 2.0]), Err(MetricsError::ConstantTruth));
        assert!(matches!(
            r2_score(&y, &[1.0]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn f_rel_values() {
        let t = [1.0, 3.0, 10.0];
        assert_eq!(f_rel_ave(&t, &t).unwrap(), 0.0);
        let p: Vec<f64> = t.iter().map(|v| 1.1 * v).collect();
        assert!((f_rel_ave(&p, &t).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(f_rel_ave(&[1.0, 2.0], &[2.0, 2.0]).unwrap(), 0.25);
        assert_eq!(
            f_rel_ave(&[1.0, 2.0], &[1.0, 0.0]),
            Err(MetricsError::ZeroTrueAccumulation { index: 1 })
        );
    }

    #[test]
    fn reconstruction() {
        let acc = reconstruct_accumulation(&[0.0; 4], TargetTransform::Ln, None).unwrap();
        assert_eq!(acc, vec![1.0, 2.0, 3.0, 4.0]);
        let one = reconstruct_accumulation(&[2.0], TargetTransform::Ln, None).unwrap();
        assert_eq!(one, vec![(-2.0f64).exp()]);
        assert_eq!(
            reconstruct_accumulation(&[1.0], TargetTransform::Log10, None),
            Err(MetricsError::MissingStandardizer)
        );
        let s = Standardizer::fit_scalar([4.0, 6.0]);
        let acc = reconstruct_accumulation(&[0.0, 1.0], TargetTransform::Log10, Some(&s)).unwrap();
        assert!((acc[0] - 1e-5).abs() < 1e-20);
        assert!((acc[1] - 1e-5 - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn report_csv_shape() {
        let r = MetricsReport::from_predictions(
            ModelKind::Mlp,
            &[1.0, 2.0],
            &[1.0, 2.0],
            &[(-1.0f64).exp(), (-2.0f64).exp()],
            vec![10.0, 20.0],
            None,
        )
        .unwrap();
        assert_eq!(r.r2, 1.0);
        assert!(r.f_rel_ave < 1e-15);
        let csv = r.accumulation_csv();
        assert!(csv.starts_with("index,true_accum,pred_accum,rel_err\n0,"));
        assert_eq!(csv.lines().count(), 3);
        let v: serde_json::Value = serde_json::from_str(&r.summary_json()).unwrap();
        assert_eq!(v["n_samples"], 2);
        assert_eq!(v["kind"], "mlp");
    }
}
