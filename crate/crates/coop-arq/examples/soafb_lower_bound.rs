//! The overhearing protocol against its analytic lower bound for the two
//! reference threshold assignments, plus the feasibility predicate.
//!
//! Run with: `cargo run --release --example soafb_lower_bound`

use coop_arq::fading::{ChannelModel, LinkVariances};
use coop_arq::outage::{p_out_soaf_b_lower_bound, requirement1_holds, OutageParams, RateSpec};
use coop_arq::protocol::{estimate_outage_curve, Protocol, ProtocolKind, SimParams};
use coop_arq::threshold::ThresholdVector;

fn main() -> coop_arq::Result<()> {
    let rate = RateSpec::from_rate(1.0)?;
    let delta = rate.delta();
    let vars = LinkVariances::unit();
    let trials = 1_000_000;

    for lambdas in [[3.9, 3.9, 3.9], [2.0, 5.0, 10.0]] {
        println!(
            "thresholds delta*{lambdas:?}: feasibility margin 1.01 -> {}",
            requirement1_holds(&lambdas, 1.01, delta)
        );
        let tv = ThresholdVector::new(lambdas.iter().map(|&l| l * delta).collect())?;
        println!("rho_db,n,bound,mc,ci");
        for rho_db in [4.0, 8.0, 12.0, 16.0] {
            let rho = 10f64.powf(rho_db / 10.0);
            let op = OutageParams::new(rate, 3, 3, vars, rho)?;
            let sp = SimParams::new(rate, 3, 3, ChannelModel::WorstCase(vars), rho)?;
            let mc =
                estimate_outage_curve(Protocol::arq(ProtocolKind::SoafB), &sp, &tv, trials, 7)?;
            for n in 0..=3 {
                let bound = p_out_soaf_b_lower_bound(n, &tv, &op)?;
                println!("{rho_db},{n},{bound:.6e},{:.6e},{:.2e}", mc[n].0, mc[n].1);
            }
        }
        println!();
    }
    Ok(())
}
