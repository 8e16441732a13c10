//! Closed-form outage probabilities against Monte-Carlo estimates for the
//! single-relay and opportunistic protocols.
//!
//! Run with: `cargo run --release --example outage_curves`

use coop_arq::fading::{ChannelModel, LinkVariances};
use coop_arq::outage::{self, OutageParams, RateSpec};
use coop_arq::protocol::{estimate_outage_curve, Protocol, ProtocolKind, SimParams};
use coop_arq::threshold::ThresholdVector;

fn main() -> coop_arq::Result<()> {
    let trials = 1_000_000;
    let seed = 42;
    let rate = RateSpec::from_rate(1.0)?;
    let vars = LinkVariances::unit();
    println!("protocol,rho_db,n,analytic,mc,ci");

    for rho_db in [5.0, 10.0, 15.0, 20.0] {
        let rho = 10f64.powf(rho_db / 10.0);

        // Selective AF with a threshold above the outage point.
        let op = OutageParams::new(rate, 1, 3, vars, rho)?;
        let sp = SimParams::new(rate, 1, 3, ChannelModel::WorstCase(vars), rho)?;
        let thresh = 1.5 * op.rate.delta();
        let tv = ThresholdVector::new(vec![thresh])?;
        let mc = estimate_outage_curve(Protocol::arq(ProtocolKind::Saf), &sp, &tv, trials, seed)?;
        for n in 0..=3 {
            let cf = outage::p_out_saf(n, thresh, &op)?;
            println!("saf(1.5d),{rho_db},{n},{cf:.6e},{:.6e},{:.2e}", mc[n].0, mc[n].1);
        }

        // Opportunistic AF across three relays.
        let op3 = OutageParams::new(rate, 3, 3, vars, rho)?;
        let sp3 = SimParams::new(rate, 3, 3, ChannelModel::WorstCase(vars), rho)?;
        let none = ThresholdVector::new(vec![])?;
        let mc = estimate_outage_curve(Protocol::arq(ProtocolKind::Oaf), &sp3, &none, trials, seed)?;
        for n in 0..=3 {
            let cf = outage::p_out_oaf(n, &op3)?;
            println!("oaf,{rho_db},{n},{cf:.6e},{:.6e},{:.2e}", mc[n].0, mc[n].1);
        }

        // Type-A selective-opportunistic AF.
        let mc = estimate_outage_curve(Protocol::arq(ProtocolKind::SoafA), &sp3, &tv, trials, seed)?;
        for n in 0..=3 {
            let cf = outage::p_out_soaf_a(n, thresh, &op3)?;
            println!("soaf-a(1.5d),{rho_db},{n},{cf:.6e},{:.6e},{:.2e}", mc[n].0, mc[n].1);
        }
    }
    Ok(())
}
