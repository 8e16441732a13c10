//! Rate-adaptive throughput of the relaying protocols under a packet-loss
//! target, averaged over random relay placements (small-scale version).
//!
//! Run with: `cargo run --release --example throughput_ordering` (minutes).

use coop_arq::experiments::throughput::{
    rate_adapted_throughput, ThresholdSource, ThroughputScan,
};
use coop_arq::fading::Geometry;
use coop_arq::protocol::{Protocol, ProtocolKind};

fn main() -> coop_arq::Result<()> {
    let scan = ThroughputScan {
        geometry: Geometry::new(0.05, 0.5, 0.0, 3.0)?,
        m: 3,
        n_max: 3,
        p_target: 1e-2,
        placements: 2,
        trials: 4000,
        info_symbols: 64,
        seed: 17,
        thresholds: ThresholdSource::Searched {
            eps0: 1e-5,
            ratios: vec![1.0, 2.0, 3.0],
        },
    };
    let grid = [14.0, 18.0];
    println!("protocol,rho_db,throughput,chosen_rates");
    for kind in [
        ProtocolKind::NoRelay,
        ProtocolKind::Oaf,
        ProtocolKind::SoafA,
        ProtocolKind::SoafB,
        ProtocolKind::SodfB,
    ] {
        for tp in rate_adapted_throughput(Protocol::arq(kind), &scan, &grid)? {
            println!(
                "{},{},{:.4},{:?}",
                kind.label(),
                tp.rho_db,
                tp.value,
                tp.rates
            );
        }
    }
    Ok(())
}
