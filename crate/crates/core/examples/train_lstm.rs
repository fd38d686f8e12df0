//! Trains the two-block LSTM on raw temperature windows and scores it.
//!
//! ```text
//! cargo run --release --example train_lstm -- [n_half_cycles] [epochs] [seq_len_min]
//! ```

use creep_surrogate::creepsim::{self, CreepMaterial, JointGeometry};
use creep_surrogate::datasets::{self, SplitSpec};
use creep_surrogate::evalmetrics;
use creep_surrogate::neuralnet::{self, LstmConfig};
use creep_surrogate::profilegen::{self, ProfileSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = ProfileSpec {
        n_half_cycles: args.first().map_or(Ok(600), |s| s.parse())?,
        ..ProfileSpec::default()
    };
    let config = LstmConfig {
        epochs: args.get(1).map_or(Ok(100), |s| s.parse())?,
        sequence_length_min: args.get(2).map_or(Ok(165.0), |s| s.parse())?,
        restarts: 1,
        seed: 7,
        ..LstmConfig::default()
    };

    let profile = profilegen::generate_profile(&spec)?;
    let records = creepsim::simulate_profile(
        &profile.trace,
        &profile.cycles,
        &CreepMaterial::default(),
        &JointGeometry::default(),
        1.0,
    )?;
    let bundle = datasets::build_lstm_dataset(
        &profile.trace,
        &profile.cycles,
        &records,
        config.sequence_length_min,
        config.overlap,
        SplitSpec::default(),
    )?;
    println!(
        "{} / {} / {} windows, ({}, {}) cells with skip: {} parameters",
        bundle.train.len(),
        bundle.validation.len(),
        bundle.test.len(),
        config.cells_block1,
        config.cells_block2,
        config.n_params()
    );

    let model = neuralnet::train_lstm(&bundle, &config)?;
    println!("best epoch {} of {}, validation loss {:.4}", model.best_epoch, model.history.len(), model.best_val_loss());

    let report = evalmetrics::evaluate(&model, &bundle)?;
    println!("test R2 {:.3} (standardized -log10 space), f_rel_ave {:.3}", report.r2, report.f_rel_ave);
    for i in (0..report.n_samples).step_by((report.n_samples / 6).max(1)) {
        println!(
            "  t = {:>7.0} min  true {:.3e}  predicted {:.3e}  rel err {:.3}",
            report.time_min[i], report.true_accum[i], report.pred_accum[i], report.rel_err[i]
        );
    }
    Ok(())
}
