//! Trains the value-to-value MLP on cycle parameters and scores it.
//!
//! ```text
//! cargo run --release --example train_mlp -- [n_half_cycles] [max_epochs] [restarts]
//! ```
//! Defaults are small enough for a quick run; the full configuration is
//! 1000 epochs and 3 restarts.

use creep_surrogate::creepsim::{self, CreepMaterial, JointGeometry};
use creep_surrogate::datasets::{self, SplitSpec};
use creep_surrogate::evalmetrics;
use creep_surrogate::neuralnet::{self, MlpConfig};
use creep_surrogate::profilegen::{self, ProfileSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = ProfileSpec {
        n_half_cycles: args.first().map_or(Ok(1000), |s| s.parse())?,
        ..ProfileSpec::default()
    };
    let config = MlpConfig {
        max_epochs: args.get(1).map_or(Ok(300), |s| s.parse())?,
        restarts: args.get(2).map_or(Ok(1), |s| s.parse())?,
        seed: 7,
        ..MlpConfig::default()
    };

    let profile = profilegen::generate_profile(&spec)?;
    let records = creepsim::simulate_profile(
        &profile.trace,
        &profile.cycles,
        &CreepMaterial::default(),
        &JointGeometry::default(),
        1.0,
    )?;
    let bundle = datasets::build_mlp_dataset(&profile.cycles, &records, SplitSpec::default())?;

    let model = neuralnet::train_mlp(&bundle, &config)?;
    println!(
        "{} parameters, {} epochs run, best epoch {} (restart {}), best validation loss {:.4}",
        model.n_params(),
        model.history.len(),
        model.best_epoch,
        model.restart,
        model.best_val_loss()
    );
    for e in model.history.iter().step_by((model.history.len() / 8).max(1)) {
        println!("  epoch {:>4}  train {:.4}  validation {:.4}", e.epoch, e.train_loss, e.val_loss);
    }

    let report = evalmetrics::evaluate(&model, &bundle)?;
    println!("test R2 {:.3} (in -ln space), f_rel_ave {:.3}", report.r2, report.f_rel_ave);
    let last = report.true_accum.len() - 1;
    println!(
        "accumulated over the test horizon: true {:.4e}, predicted {:.4e}",
        report.true_accum[last], report.pred_accum[last]
    );
    Ok(())
}
