//! Per-SNR effective-threshold search against the asymptotic log-scale
//! assignment, with the growth-rate diagnostic.
//!
//! Run with: `cargo run --release --example threshold_search`

use coop_arq::fading::{variances_from_geometry, Geometry};
use coop_arq::outage::{OutageParams, RateSpec};
use coop_arq::threshold::{
    check_condition_growth, find_effective_threshold, min_lambda_log_scale, CodeMetrics, SearchOptions,
    ThresholdRatios,
};

fn main() -> coop_arq::Result<()> {
    let geometry = Geometry::new(0.05, 0.5, 0.0, 3.0)?;
    let vars = variances_from_geometry(&geometry)?;
    let ratios = ThresholdRatios::new(vec![1.0, 2.0, 3.0])?;
    let metrics = CodeMetrics::new(10.0, 1.0, 1e-5)?; // rate-1 code
    let lambda_e = min_lambda_log_scale(3, 3, &ratios, &metrics);
    println!("log-scale coefficient lambda_e = {lambda_e:.4}");
    println!("rho_db,effective,delta_1,delta_2,delta_3,logscale_delta_1");

    let grid: Vec<f64> = (1..=10).map(|i| 6.0 * i as f64).collect();
    let mut schedule = Vec::new();
    for &rho_db in &grid {
        let rho = 10f64.powf(rho_db / 10.0);
        let p = OutageParams::new(RateSpec::from_rate(1.0)?, 3, 3, vars, rho)?;
        let star = find_effective_threshold(&ratios, &metrics, &p, &SearchOptions::default())?;
        let t = star.thresholds(&ratios);
        println!(
            "{rho_db},{:.4},{:.4},{:.4},{:.4},{:.4}",
            star.value,
            t.deltas()[0],
            t.deltas()[1],
            t.deltas()[2],
            lambda_e * rho.ln()
        );
        schedule.push((rho, star.value));
    }

    // Growth-rate check of the searched schedule over the same ladder.
    let ladder: Vec<f64> = schedule.iter().map(|x| x.0).collect();
    let diag = check_condition_growth(
        |rho| {
            schedule
                .iter()
                .find(|x| (x.0 - rho).abs() < 1e-9)
                .map(|x| x.1)
                .unwrap()
        },
        &ladder,
    )?;
    println!(
        "growth-rate limit of the searched schedule: {:.5} (pass = {})",
        diag.limit, diag.passes
    );
    Ok(())
}
