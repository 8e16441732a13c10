//! Combining gain of hybrid ARQ: paired-seed comparison of plain ARQ and
//! SNR-weighted-combining HARQ, at outage level and at packet level.
//!
//! Run with: `cargo run --release --example harq_gain`

use coop_arq::fading::{variances_from_geometry, ChannelModel, Geometry};
use coop_arq::outage::{OutageParams, RateSpec};
use coop_arq::protocol::{estimate_outage_curve, Protocol, ProtocolKind, SimParams};
use coop_arq::tcm::code::{CodeRate, TrellisCode};
use coop_arq::tcm::per::estimate_per_curve;
use coop_arq::threshold::{
    find_effective_threshold, CodeMetrics, SearchOptions, ThresholdRatios,
};

fn main() -> coop_arq::Result<()> {
    let geom = Geometry::new(0.05, 0.5, 0.0, 3.0)?;
    let vars = variances_from_geometry(&geom)?;
    let rate = RateSpec::from_rate(1.0)?;
    let code = TrellisCode::for_rate(CodeRate::R1);
    let ratios = ThresholdRatios::new(vec![1.0, 2.0, 3.0])?;
    let metrics = CodeMetrics::new(10.0, 1.0, 1e-5)?;

    println!("level,rho_db,n,arq,harq");
    for rho_db in [6.0, 9.0, 12.0] {
        let rho = 10f64.powf(rho_db / 10.0);
        let op = OutageParams::new(rate, 3, 3, vars, rho)?;
        let sp = SimParams::new(rate, 3, 3, ChannelModel::WorstCase(vars), rho)?;
        let star = find_effective_threshold(&ratios, &metrics, &op, &SearchOptions::default())?;
        let tv = star.thresholds(&ratios);

        let arq = estimate_outage_curve(Protocol::arq(ProtocolKind::SoafB), &sp, &tv, 400_000, 5)?;
        let harq =
            estimate_outage_curve(Protocol::harq(ProtocolKind::SoafB), &sp, &tv, 400_000, 5)?;
        for n in 0..=3 {
            println!("outage,{rho_db},{n},{:.4e},{:.4e}", arq[n].0, harq[n].0);
        }

        let arq = estimate_per_curve(
            Protocol::arq(ProtocolKind::SoafB),
            &code,
            128,
            &sp,
            &tv,
            30_000,
            5,
        )?;
        let harq = estimate_per_curve(
            Protocol::harq(ProtocolKind::SoafB),
            &code,
            128,
            &sp,
            &tv,
            30_000,
            5,
        )?;
        for n in 0..=3 {
            println!("per,{rho_db},{n},{:.4e},{:.4e}", arq[n].0, harq[n].0);
        }
    }
    Ok(())
}
