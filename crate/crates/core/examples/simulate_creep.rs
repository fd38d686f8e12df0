//! Runs the lumped creep oracle over a generated profile.
//!
//! ```text
//! cargo run --release --example simulate_creep -- [n_half_cycles] [seed]
//! ```

use creep_surrogate::creepsim::{self, CreepMaterial, JointGeometry};
use creep_surrogate::profilegen::{self, ProfileSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = ProfileSpec {
        n_half_cycles: args.first().map_or(Ok(1000), |s| s.parse())?,
        seed: args.get(1).map_or(Ok(0), |s| s.parse())?,
        ..ProfileSpec::default()
    };
    let profile = profilegen::generate_profile(&spec)?;
    let material = CreepMaterial::default();
    let geometry = JointGeometry::default();
    let records = creepsim::simulate_profile(&profile.trace, &profile.cycles, &material, &geometry, 1.0)?;

    println!("{:>6} {:>8} {:>8} {:>8} {:>12} {:>12}", "cycle", "start C", "target C", "dwell", "increment", "total");
    for (hc, r) in profile.cycles.iter().zip(&records).take(15) {
        println!(
            "{:>6} {:>8.1} {:>8.1} {:>8.1} {:>12.3e} {:>12.3e}",
            r.cycle_index, hc.t_start_c, hc.t_target_c, hc.dwell_min, r.increment, r.running_total
        );
    }
    let last = records.last().expect("at least one half-cycle");
    println!("...");
    println!(
        "accumulated creep strain {:.4e} after {} half-cycles, increments span {:.1} decades",
        last.running_total,
        records.len(),
        creepsim::decade_span(&records)
    );

    // Share of the total from half-cycles ending above 50 C.
    let hot: f64 = profile
        .cycles
        .iter()
        .zip(&records)
        .filter(|(hc, _)| hc.t_target_c > 50.0)
        .map(|(_, r)| r.increment)
        .sum();
    println!("{:.1} % of the creep comes from half-cycles ending above 50 C", 100.0 * hot / last.running_total);
    Ok(())
}
