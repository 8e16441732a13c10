//! Relay placement and link statistics: worst-case variances from the disk
//! geometry against exact per-pair variances of sampled placements.
//!
//! Run with: `cargo run --release --example relay_geometry`

use coop_arq::fading::{place_relays, variances_from_geometry, ChannelModel, Geometry};
use coop_arq::rng::SubRng;

fn main() -> coop_arq::Result<()> {
    let geom = Geometry::new(0.05, 0.5, 0.0, 3.0)?;
    let worst = variances_from_geometry(&geom)?;
    println!(
        "worst-case variances: beta0={} beta1={:.4} beta2={:.4} beta3={:.1}",
        worst.beta0, worst.beta1, worst.beta2, worst.beta3
    );

    let mut rng = SubRng::from_key(&[2024]);
    for trial in 0..3 {
        let pos = place_relays(&geom, 3, &mut rng);
        let exact = ChannelModel::from_positions(&geom, &pos)?;
        println!("placement {trial}:");
        for (j, (x, y)) in pos.iter().enumerate() {
            println!(
                "  relay {j} at ({x:.4}, {y:.4}): beta_sr = {:.4} (>= {:.4}), beta_rd = {:.4} (>= {:.4})",
                exact.beta_sr(j),
                worst.beta1,
                exact.beta_rd(j),
                worst.beta2,
            );
        }
    }
    Ok(())
}
