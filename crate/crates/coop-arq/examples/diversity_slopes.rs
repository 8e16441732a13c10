//! High-SNR log-log slopes of the analytic outage forms: the achieved
//! diversity orders of every protocol variant.
//!
//! Run with: `cargo run --release --example diversity_slopes`

use coop_arq::experiments::config::ExperimentConfig;
use coop_arq::experiments::slopes::standard_slope_suite;

fn main() -> coop_arq::Result<()> {
    let cfg = ExperimentConfig::default();
    println!("{:<34} {:>10} {:>8}", "curve", "slope", "target");
    for (name, slope, want) in standard_slope_suite(&cfg)? {
        println!("{name:<34} {slope:>10.3} {want:>8.1}");
    }
    Ok(())
}
