//! Turns a profile and its creep history into MLP and LSTM datasets.
//!
//! ```text
//! cargo run --release --example build_datasets -- [n_half_cycles] [seq_len_min] [out_dir]
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use creep_surrogate::creepsim::{self, CreepMaterial, JointGeometry};
use creep_surrogate::datasets::{self, SplitSpec};
use creep_surrogate::profilegen::{self, ProfileSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(1000), |s| s.parse())?;
    let seq_len: f64 = args.get(1).map_or(Ok(165.0), |s| s.parse())?;
    let spec = ProfileSpec { n_half_cycles: n, ..ProfileSpec::default() };
    let profile = profilegen::generate_profile(&spec)?;
    let records = creepsim::simulate_profile(
        &profile.trace,
        &profile.cycles,
        &CreepMaterial::default(),
        &JointGeometry::default(),
        1.0,
    )?;
    let split = SplitSpec::default();

    let mlp = datasets::build_mlp_dataset(&profile.cycles, &records, split)?;
    println!(
        "mlp: {} train / {} validation / {} test half-cycles, {:.0} h on the training side",
        mlp.train.len(),
        mlp.validation.len(),
        mlp.test.len(),
        mlp.training_hours()
    );
    let first = &mlp.train[0];
    println!("  first sample raw {:?} -> target {:.3}", first.raw_features, first.target);

    let lstm = datasets::build_lstm_dataset(&profile.trace, &profile.cycles, &records, seq_len, 0.75, split)?;
    let seq = lstm.sequence.as_ref().expect("lstm bundles carry window parameters");
    println!(
        "lstm: window {} samples, stride {}, {} train / {} validation / {} test windows",
        seq.window,
        seq.stride,
        lstm.train.len(),
        lstm.validation.len(),
        lstm.test.len()
    );

    for fraction in [0.125, 0.5] {
        let part = datasets::segment_training_fraction(&mlp, fraction)?;
        println!(
            "  fraction {fraction}: {} train + {} validation half-cycles, test unchanged ({})",
            part.train.len(),
            part.validation.len(),
            part.test.len()
        );
    }

    if let Some(dir) = args.get(2).map(PathBuf::from) {
        let provenance = BTreeMap::from([("profile_seed".to_string(), spec.seed)]);
        datasets::write_bundle(&dir.join("mlp"), &mlp, &provenance)?;
        datasets::write_bundle(&dir.join("lstm"), &lstm, &provenance)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
