//! Experiment orchestration: one function per pipeline stage plus the
//! argument parser used by the `creep-surrogate` binary.
//!
//! Artifacts live under the output directory:
//!
//! ```text
//! config.txt
//! profile/{half_cycles.csv, trace.csv, summary.json}
//! creep/{creep.csv, summary.json}
//! datasets/{mlp,lstm}/{train,validation,test}.csv + dataset.json
//! models/<kind>_f<fraction>.json, models/<kind>_f<fraction>_log.csv
//! reports/<kind>_f<fraction>.json, reports/<kind>_f<fraction>_accumulation.csv
//! sweeps/{fraction.csv, fraction_summary.json, seqlen.csv}
//! ```

mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

pub use config::{derive_seed, ConfigError, ExperimentConfig, CONFIG_VERSION};

use crate::creepsim::{self, CreepError, CreepRecord};
use crate::csvio::write_atomic;
use crate::datasets::{self, DatasetBundle, DatasetError, LstmSample, MlpSample};
use crate::evalmetrics::{self, Evaluable, MetricsError, MetricsReport};
use crate::neuralnet::{self, ModelKind, NetError, TrainedModel};
use crate::profilegen::{self, GeneratedProfile, HalfCycle, ProfileError, TemperatureTrace};

/// Failure of a command, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("missing or unreadable input: {0}")]
    MissingInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 2 usage/config, 3 missing inputs, 4 numerical failure;
    /// 1 is reserved for failing to write outputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::MissingInput(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Csv(_) => CliError::MissingInput(e.to_string()),
            ProfileError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CreepError> for CliError {
    fn from(e: CreepError) -> Self {
        match e {
            CreepError::Csv(_) => CliError::MissingInput(e.to_string()),
            CreepError::InvalidMaterial(_)
            | CreepError::InvalidGeometry(_)
            | CreepError::InvalidStep(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Csv(_) | DatasetError::Io(_) | DatasetError::Sidecar(_) => {
                CliError::MissingInput(e.to_string())
            }
            DatasetError::NonPositiveIncrement(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            NetError::Io(_) | NetError::Format(_) | NetError::UnsupportedVersion(_) => {
                CliError::MissingInput(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Net(n) => n.into(),
            MetricsError::Io(m) => CliError::Io(m),
            MetricsError::KindMismatch { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

/// Artifact locations under one output directory.
#[derive(Debug, Clone)]
pub struct ArtifactPaths {
    pub root: PathBuf,
}

impl ArtifactPaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.txt")
    }
    pub fn cycles(&self) -> PathBuf {
        self.root.join("profile/half_cycles.csv")
    }
    pub fn trace(&self) -> PathBuf {
        self.root.join("profile/trace.csv")
    }
    pub fn profile_summary(&self) -> PathBuf {
        self.root.join("profile/summary.json")
    }
    pub fn creep(&self) -> PathBuf {
        self.root.join("creep/creep.csv")
    }
    pub fn creep_summary(&self) -> PathBuf {
        self.root.join("creep/summary.json")
    }
    pub fn dataset(&self, kind: ModelKind) -> PathBuf {
        self.root.join("datasets").join(kind.as_str())
    }
    pub fn model(&self, kind: ModelKind, fraction: f64) -> PathBuf {
        self.root.join(format!("models/{kind}_f{fraction}.json"))
    }
    pub fn training_log(&self, kind: ModelKind, fraction: f64) -> PathBuf {
        self.root.join(format!("models/{kind}_f{fraction}_log.csv"))
    }
    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }
    pub fn report_stem(kind: ModelKind, fraction: f64) -> String {
        format!("{kind}_f{fraction}")
    }
    pub fn sweep_fraction(&self) -> PathBuf {
        self.root.join("sweeps/fraction.csv")
    }
    pub fn sweep_fraction_summary(&self) -> PathBuf {
        self.root.join("sweeps/fraction_summary.json")
    }
    pub fn sweep_seqlen(&self) -> PathBuf {
        self.root.join("sweeps/seqlen.csv")
    }
}

fn paths(cfg: &ExperimentConfig) -> ArtifactPaths {
    ArtifactPaths::new(&cfg.out_dir)
}

#[derive(Serialize)]
struct ProfileSummary {
    seed: u64,
    n_half_cycles: usize,
    total_duration_h: f64,
    clamped_cycles: usize,
    distribution: profilegen::DistributionSummary,
}

/// Draws the half-cycle profile and writes cycles, trace and summary.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<GeneratedProfile, CliError> {
    cfg.validate()?;
    let spec = cfg.profile_spec();
    let profile = profilegen::generate_profile(&spec)?;
    let p = paths(cfg);
    let mut buf = Vec::new();
    profilegen::write_cycles_csv(&profile.cycles, &mut buf).expect("in-memory write");
    write_out(&p.cycles(), &buf)?;
    buf.clear();
    profilegen::write_trace_csv(&profile.trace, &mut buf).expect("in-memory write");
    write_out(&p.trace(), &buf)?;
    let summary = ProfileSummary {
        seed: spec.seed,
        n_half_cycles: profile.cycles.len(),
        total_duration_h: profile.trace.total_duration_h(),
        clamped_cycles: profile.cycles.iter().filter(|c| c.dwell_clamped()).count(),
        distribution: profilegen::profile_statistics(&profile.cycles)?,
    };
    write_out(&p.profile_summary(), to_json(&summary).as_bytes())?;
    write_out(&p.config(), cfg.to_text().as_bytes())?;
    Ok(profile)
}

fn load_profile(cfg: &ExperimentConfig) -> Result<(Vec<HalfCycle>, TemperatureTrace), CliError> {
    let p = paths(cfg);
    let cycles = profilegen::read_cycles_csv(open(&p.cycles())?)?;
    let trace = profilegen::read_trace_csv(open(&p.trace())?)?;
    Ok((cycles, trace))
}

fn load_creep(cfg: &ExperimentConfig) -> Result<Vec<CreepRecord>, CliError> {
    Ok(creepsim::read_creep_csv(open(&paths(cfg).creep())?)?)
}

#[derive(Serialize)]
struct CreepSummary {
    n_cycles: usize,
    dt_s: f64,
    decade_span: f64,
    min_increment: f64,
    max_increment: f64,
    running_total: f64,
}

/// Runs the creep oracle over the generated profile.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Vec<CreepRecord>, CliError> {
    cfg.validate()?;
    let (cycles, trace) = load_profile(cfg)?;
    let records =
        creepsim::simulate_profile(&trace, &cycles, &cfg.material, &cfg.geometry, cfg.dt_s)?;
    let p = paths(cfg);
    let mut buf = Vec::new();
    creepsim::write_creep_csv(&records, &mut buf).expect("in-memory write");
    write_out(&p.creep(), &buf)?;
    let incs = records.iter().map(|r| r.increment);
    let summary = CreepSummary {
        n_cycles: records.len(),
        dt_s: cfg.dt_s,
        decade_span: creepsim::decade_span(&records),
        min_increment: incs.clone().fold(f64::INFINITY, f64::min),
        max_increment: incs.fold(0.0, f64::max),
        running_total: records.last().map_or(0.0, |r| r.running_total),
    };
    write_out(&p.creep_summary(), to_json(&summary).as_bytes())?;
    Ok(records)
}

fn build_lstm(
    cfg: &ExperimentConfig,
    seq_len_min: f64,
) -> Result<DatasetBundle<LstmSample>, CliError> {
    let (cycles, trace) = load_profile(cfg)?;
    let records = load_creep(cfg)?;
    Ok(datasets::build_lstm_dataset(
        &trace,
        &cycles,
        &records,
        seq_len_min,
        cfg.lstm.overlap,
        cfg.split,
    )?)
}

/// Builds and writes the full-fraction MLP and LSTM datasets.
pub fn cmd_dataset(
    cfg: &ExperimentConfig,
) -> Result<(DatasetBundle<MlpSample>, DatasetBundle<LstmSample>), CliError> {
    cfg.validate()?;
    let (cycles, trace) = load_profile(cfg)?;
    let records = load_creep(cfg)?;
    let mlp = datasets::build_mlp_dataset(&cycles, &records, cfg.split)?;
    let lstm = datasets::build_lstm_dataset(
        &trace,
        &cycles,
        &records,
        cfg.lstm.sequence_length_min,
        cfg.lstm.overlap,
        cfg.split,
    )?;
    let provenance = BTreeMap::from([
        ("master_seed".to_string(), cfg.seed),
        ("profile_seed".to_string(), cfg.profile_spec().seed),
    ]);
    let p = paths(cfg);
    datasets::write_bundle(&p.dataset(ModelKind::Mlp), &mlp, &provenance)?;
    datasets::write_bundle(&p.dataset(ModelKind::Lstm), &lstm, &provenance)?;
    Ok((mlp, lstm))
}

fn check_fraction(fraction: f64) -> Result<(), CliError> {
    if fraction > 0.0 && fraction <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("fraction {fraction} outside (0, 1]")))
    }
}

fn load_bundle<S: datasets::CsvSample>(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    fraction: f64,
) -> Result<DatasetBundle<S>, CliError> {
    let (full, _) = datasets::read_bundle::<S>(&paths(cfg).dataset(kind))?;
    Ok(datasets::segment_training_fraction(&full, fraction)?)
}

fn train_on(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    fraction: f64,
) -> Result<TrainedModel, CliError> {
    Ok(match kind {
        ModelKind::Mlp => {
            let bundle = load_bundle::<MlpSample>(cfg, kind, fraction)?;
            neuralnet::train_mlp(&bundle, &cfg.mlp_config(fraction))?
        }
        ModelKind::Lstm => {
            let bundle = load_bundle::<LstmSample>(cfg, kind, fraction)?;
            neuralnet::train_lstm(&bundle, &cfg.lstm_config(fraction, None))?
        }
    })
}

/// Trains one model on the chronological `fraction` of the training side.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    fraction: f64,
) -> Result<TrainedModel, CliError> {
    cfg.validate()?;
    check_fraction(fraction)?;
    let model = train_on(cfg, kind, fraction)?;
    let p = paths(cfg);
    model.save(&p.model(kind, fraction))?;
    model.write_training_log(&p.training_log(kind, fraction))?;
    Ok(model)
}

fn evaluate_bundle<S: Evaluable>(
    model: Option<&TrainedModel>,
    bundle: &DatasetBundle<S>,
) -> Result<MetricsReport, CliError> {
    match model {
        Some(m) => {
            if m.feature_standardizer != bundle.feature_standardizer
                || m.target_standardizer != bundle.target_standardizer
            {
                return Err(CliError::Usage(
                    "model was trained on a different dataset".into(),
                ));
            }
            Ok(evalmetrics::evaluate(m, bundle)?)
        }
        None => {
            let targets: Vec<f64> = bundle.test.iter().map(datasets::Sample::target).collect();
            Ok(evalmetrics::evaluate_predictions(bundle, &targets)?)
        }
    }
}

/// Scores a trained model, or with `oracle` the true targets themselves, on
/// the test partition and writes the report and accumulation series.
pub fn cmd_evaluate(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    fraction: f64,
    oracle: bool,
) -> Result<MetricsReport, CliError> {
    cfg.validate()?;
    check_fraction(fraction)?;
    let p = paths(cfg);
    let model = if oracle {
        None
    } else {
        Some(TrainedModel::load(&p.model(kind, fraction))?)
    };
    let mut report = match kind {
        ModelKind::Mlp => evaluate_bundle(model.as_ref(), &load_bundle::<MlpSample>(cfg, kind, fraction)?)?,
        ModelKind::Lstm => evaluate_bundle(model.as_ref(), &load_bundle::<LstmSample>(cfg, kind, fraction)?)?,
    };
    report.config_fingerprint = cfg.fingerprint();
    let stem = if oracle {
        format!("{}_oracle", ArtifactPaths::report_stem(kind, fraction))
    } else {
        ArtifactPaths::report_stem(kind, fraction)
    };
    report.write(&p.reports(), &stem)?;
    Ok(report)
}

/// One row of the fraction sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionRow {
    pub fraction: f64,
    pub hours: f64,
    pub model: ModelKind,
    pub f_rel_ave: f64,
    pub r2: f64,
}

/// Trend of one model's error over the fraction ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionTrend {
    pub model: ModelKind,
    pub f_rel_ave_smallest: f64,
    pub f_rel_ave_largest: f64,
    /// Error at the largest fraction is within the band of the smallest.
    pub largest_not_worse: bool,
    /// No step up the ladder raises the error by more than the band.
    pub monotone_within_band: bool,
}

/// Absolute noise band used by the trend flags.
pub const TREND_BAND: f64 = 0.02;

pub fn fraction_trends(rows: &[FractionRow]) -> Vec<FractionTrend> {
    [ModelKind::Mlp, ModelKind::Lstm]
        .into_iter()
        .filter_map(|model| {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.model == model)
                .map(|r| r.f_rel_ave)
                .collect();
            let (first, last) = (*errs.first()?, *errs.last()?);
            Some(FractionTrend {
                model,
                f_rel_ave_smallest: first,
                f_rel_ave_largest: last,
                largest_not_worse: last <= first + TREND_BAND,
                monotone_within_band: errs.windows(2).all(|w| w[1] <= w[0] + TREND_BAND),
            })
        })
        .collect()
}

/// Trains and scores both models at every configured fraction.
pub fn cmd_sweep_fraction(cfg: &ExperimentConfig) -> Result<Vec<FractionRow>, CliError> {
    cfg.validate()?;
    let p = paths(cfg);
    let (mlp_full, _) = datasets::read_bundle::<MlpSample>(&p.dataset(ModelKind::Mlp))?;
    let (lstm_full, _) = datasets::read_bundle::<LstmSample>(&p.dataset(ModelKind::Lstm))?;
    let mut rows = Vec::new();
    for &fraction in &cfg.fractions {
        let bundle = datasets::segment_training_fraction(&mlp_full, fraction)?;
        let model = neuralnet::train_mlp(&bundle, &cfg.mlp_config(fraction))?;
        let report = evalmetrics::evaluate(&model, &bundle)?;
        rows.push(FractionRow {
            fraction,
            hours: bundle.training_hours(),
            model: ModelKind::Mlp,
            f_rel_ave: report.f_rel_ave,
            r2: report.r2,
        });
        let bundle = datasets::segment_training_fraction(&lstm_full, fraction)?;
        let model = neuralnet::train_lstm(&bundle, &cfg.lstm_config(fraction, None))?;
        let report = evalmetrics::evaluate(&model, &bundle)?;
        rows.push(FractionRow {
            fraction,
            hours: bundle.training_hours(),
            model: ModelKind::Lstm,
            f_rel_ave: report.f_rel_ave,
            r2: report.r2,
        });
    }
    let mut csv = String::from("fraction,hours,model,f_rel_ave,r2\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.fraction, r.hours, r.model, r.f_rel_ave, r.r2
        ));
    }
    write_out(&p.sweep_fraction(), csv.as_bytes())?;
    write_out(
        &p.sweep_fraction_summary(),
        to_json(&fraction_trends(&rows)).as_bytes(),
    )?;
    Ok(rows)
}

/// One row of the sequence-length sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqLenRow {
    pub seq_len: f64,
    pub f_rel_ave: f64,
    pub r2: f64,
}

/// Rebuilds the LSTM dataset for each window length, trains and scores it.
pub fn cmd_sweep_seqlen(
    cfg: &ExperimentConfig,
    lengths: Option<&[f64]>,
) -> Result<Vec<SeqLenRow>, CliError> {
    cfg.validate()?;
    let lengths = lengths.unwrap_or(&cfg.seq_lengths_min);
    let period = cfg.profile.sample_period_min;
    if let Some(&bad) = lengths.iter().find(|&&l| !(l >= period)) {
        return Err(CliError::Usage(format!(
            "sequence length {bad} min is shorter than the {period} min sample period"
        )));
    }
    let mut rows = Vec::new();
    for &len in lengths {
        let bundle = build_lstm(cfg, len)?;
        let model = neuralnet::train_lstm(&bundle, &cfg.lstm_config(1.0, Some(len)))?;
        let report = evalmetrics::evaluate(&model, &bundle)?;
        rows.push(SeqLenRow {
            seq_len: len,
            f_rel_ave: report.f_rel_ave,
            r2: report.r2,
        });
    }
    let mut csv = String::from("seq_len,f_rel_ave,r2\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.seq_len, r.f_rel_ave, r.r2));
    }
    write_out(&paths(cfg).sweep_seqlen(), csv.as_bytes())?;
    Ok(rows)
}

#[derive(Debug, Parser)]
#[command(name = "creep-surrogate", version, about = "Thermal-cycle creep surrogate experiments")]
pub struct Cli {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overrides `out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed, overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw the half-cycle profile and render the temperature trace.
    Generate,
    /// Integrate the creep oracle over the profile.
    Simulate,
    /// Build the MLP and LSTM datasets.
    Dataset,
    /// Train one model.
    Train {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
    },
    /// Score a trained model on the test partition.
    Evaluate {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        /// Score the true targets instead of a model.
        #[arg(long)]
        oracle: bool,
    },
    /// Train and score both models over the configured fractions.
    SweepFraction,
    /// Train and score the LSTM over several window lengths.
    SweepSeqlen {
        /// Comma-separated window lengths in minutes.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<f64>>,
    },
}

/// Reads the config file (if any) and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(ConfigError::Invalid(format!("{}: {e}", path.display())))
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn model_kind(name: &str) -> Result<ModelKind, CliError> {
    name.parse()
        .map_err(|_| CliError::Usage(format!("unknown model `{name}`, expected mlp or lstm")))
}

/// Executes one parsed command and returns a one-line description of the result.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = resolve_config(cli)?;
    Ok(match &cli.command {
        Command::Generate => {
            let p = cmd_generate(&cfg)?;
            format!(
                "generated {} half-cycles, {:.1} h",
                p.cycles.len(),
                p.trace.total_duration_h()
            )
        }
        Command::Simulate => {
            let r = cmd_simulate(&cfg)?;
            format!(
                "simulated {} half-cycles, increments span {:.2} decades",
                r.len(),
                creepsim::decade_span(&r)
            )
        }
        Command::Dataset => {
            let (m, l) = cmd_dataset(&cfg)?;
            format!(
                "mlp {}/{}/{} and lstm {}/{}/{} train/validation/test samples",
                m.train.len(),
                m.validation.len(),
                m.test.len(),
                l.train.len(),
                l.validation.len(),
                l.test.len()
            )
        }
        Command::Train { model, fraction } => {
            let kind = model_kind(model)?;
            let m = cmd_train(&cfg, kind, *fraction)?;
            format!(
                "{kind}: {} epochs, best epoch {} with validation loss {:.4e}",
                m.history.len(),
                m.best_epoch,
                m.best_val_loss()
            )
        }
        Command::Evaluate {
            model,
            fraction,
            oracle,
        } => {
            let kind = model_kind(model)?;
            let r = cmd_evaluate(&cfg, kind, *fraction, *oracle)?;
            format!("{kind}: r2 {:.4}, f_rel_ave {:.4} over {} samples", r.r2, r.f_rel_ave, r.n_samples)
        }
        Command::SweepFraction => {
            let rows = cmd_sweep_fraction(&cfg)?;
            format!("{} sweep points written", rows.len())
        }
        Command::SweepSeqlen { lengths } => {
            let rows = cmd_sweep_seqlen(&cfg, lengths.as_deref())?;
            format!("{} sweep points written", rows.len())
        }
    })
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
