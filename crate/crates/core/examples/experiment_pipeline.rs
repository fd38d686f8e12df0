//! Runs the command pipeline end to end in a scratch directory: generate,
//! simulate, dataset, train, evaluate and both sweeps, on a reduced setup.
//!
//! ```text
//! cargo run --release --example experiment_pipeline -- [out_dir]
//! ```
//! The same steps are available from the `creep-surrogate` binary, e.g.
//! `creep-surrogate --config exp.txt train --model lstm --fraction 0.5`.

use std::path::PathBuf;

use creep_surrogate::cli::{self, ExperimentConfig};
use creep_surrogate::neuralnet::ModelKind;

const CONFIG: &str = "\
seed = 3
profile.n_half_cycles = 400
dataset.fractions = 0.25, 0.5, 1
dataset.seq_lengths_min = 10, 60, 165
mlp.neurons_per_layer = 64
mlp.max_epochs = 200
mlp.early_stop_patience = 40
mlp.restarts = 1
lstm.epochs = 40
lstm.restarts = 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("creep-surrogate-demo"), PathBuf::from);
    let mut cfg = ExperimentConfig::parse(CONFIG)?;
    cfg.out_dir = out.clone();

    let profile = cli::cmd_generate(&cfg)?;
    println!("profile: {} half-cycles, {:.0} h", profile.cycles.len(), profile.trace.total_duration_h());
    let creep = cli::cmd_simulate(&cfg)?;
    println!("creep: total {:.3e}", creep.last().map_or(0.0, |r| r.running_total));
    let (mlp, lstm) = cli::cmd_dataset(&cfg)?;
    println!(
        "datasets: {} mlp samples, {} lstm windows",
        mlp.train.len() + mlp.validation.len() + mlp.test.len(),
        lstm.train.len() + lstm.validation.len() + lstm.test.len()
    );

    for kind in [ModelKind::Mlp, ModelKind::Lstm] {
        let oracle = cli::cmd_evaluate(&cfg, kind, 1.0, true)?;
        cli::cmd_train(&cfg, kind, 1.0)?;
        let report = cli::cmd_evaluate(&cfg, kind, 1.0, false)?;
        println!(
            "{kind}: R2 {:.3}, f_rel_ave {:.3} (oracle check f_rel_ave {:.1e})",
            report.r2, report.f_rel_ave, oracle.f_rel_ave
        );
    }

    println!("fraction sweep:");
    for row in cli::cmd_sweep_fraction(&cfg)? {
        println!("  {:<5} {:>5} {:>7.1} h  f_rel_ave {:.3}", row.model, row.fraction, row.hours, row.f_rel_ave);
    }
    println!("window length sweep:");
    for row in cli::cmd_sweep_seqlen(&cfg, None)? {
        println!("  {:>5} min  f_rel_ave {:.3}  R2 {:.3}", row.seq_len, row.f_rel_ave, row.r2);
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
