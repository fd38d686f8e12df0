//! Draws a thermal mission profile and prints its property summary.
//!
//! ```text
//! cargo run --release --example generate_profile -- [n_half_cycles] [seed] [out_dir]
//! ```
//! With `out_dir` the half-cycles and the 1 min trace are written as CSV.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use creep_surrogate::profilegen::{self, ProfileSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = ProfileSpec {
        n_half_cycles: args.first().map_or(Ok(10_000), |s| s.parse())?,
        seed: args.get(1).map_or(Ok(0), |s| s.parse())?,
        ..ProfileSpec::default()
    };
    let profile = profilegen::generate_profile(&spec)?;
    let stats = profilegen::profile_statistics(&profile.cycles)?;

    println!("{} half-cycles, {:.0} h of operation", stats.n_cycles, profile.trace.total_duration_h());
    println!("{:<12} {:>9} {:>9} {:>9} {:>9}", "property", "min", "median", "mean", "max");
    for (name, s) in [
        ("t_target C", stats.t_target_c),
        ("t_dot K/min", stats.t_dot_max),
        ("delta_t K", stats.delta_t_k),
        ("dwell min", stats.dwell_min),
    ] {
        println!("{name:<12} {:>9.2} {:>9.2} {:>9.2} {:>9.2}", s.min, s.median, s.mean, s.max);
    }
    let clamped = profile.cycles.iter().filter(|c| c.dwell_clamped()).count();
    println!("dwell clamped on {clamped} half-cycles");

    if let Some(dir) = args.get(2).map(PathBuf::from) {
        fs::create_dir_all(&dir)?;
        profilegen::write_cycles_csv(&profile.cycles, BufWriter::new(File::create(dir.join("half_cycles.csv"))?))?;
        profilegen::write_trace_csv(&profile.trace, BufWriter::new(File::create(dir.join("trace.csv"))?))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
