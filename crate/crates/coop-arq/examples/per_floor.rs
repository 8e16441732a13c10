//! Error floors of coded packets under constant relay thresholds: the
//! packet error rate of later ARQ rounds stops improving relative to the
//! first round while the outage curves keep steepening.
//!
//! Run with: `cargo run --release --example per_floor` (a few minutes).

use coop_arq::fading::{ChannelModel, LinkVariances};
use coop_arq::outage::{p_out_saf, OutageParams, RateSpec};
use coop_arq::protocol::{Protocol, ProtocolKind, SimParams};
use coop_arq::tcm::code::{CodeRate, TrellisCode};
use coop_arq::tcm::per::estimate_per_curve;
use coop_arq::threshold::ThresholdVector;

fn main() -> coop_arq::Result<()> {
    let code = TrellisCode::for_rate(CodeRate::R1);
    let rate = RateSpec::from_rate(1.0)?;
    let vars = LinkVariances::unit();
    let trials = 200_000;
    let info = 128;

    for lam in [1.5, 3.0] {
        let tv = ThresholdVector::new(vec![lam * rate.delta()])?;
        println!("-- threshold {lam} x delta, rate-1 code, {trials} trials");
        println!("rho_db,per1,per2,per3,ratio2,ratio3,outage3");
        for rho_db in [18.0, 20.0, 22.0, 24.0, 26.0] {
            let rho = 10f64.powf(rho_db / 10.0);
            let sp = SimParams::new(rate, 1, 3, ChannelModel::WorstCase(vars), rho)?;
            let op = OutageParams::new(rate, 1, 3, vars, rho)?;
            let per = estimate_per_curve(
                Protocol::arq(ProtocolKind::Saf),
                &code,
                info,
                &sp,
                &tv,
                trials,
                11,
            )?;
            println!(
                "{rho_db},{:.3e},{:.3e},{:.3e},{:.3},{:.3},{:.3e}",
                per[1].0,
                per[2].0,
                per[3].0,
                per[2].0 / per[1].0.max(1e-12),
                per[3].0 / per[1].0.max(1e-12),
                p_out_saf(3, lam * rate.delta(), &op)?
            );
        }
    }
    Ok(())
}
