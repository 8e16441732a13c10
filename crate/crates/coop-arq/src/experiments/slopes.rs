//! The standard suite of analytic high-SNR slope checks.

use crate::error::Result;
use crate::experiments::config::ExperimentConfig;
use crate::experiments::slope::diversity_slope;
use crate::fading::LinkVariances;
use crate::outage::{self, OutageParams, RateSpec};
use crate::threshold::ThresholdVector;

fn params(rho_db: f64, m: usize, n_max: usize) -> Result<OutageParams> {
    OutageParams::new(
        RateSpec::from_rate(1.0)?,
        m,
        n_max,
        LinkVariances::unit(),
        10f64.powf(rho_db / 10.0),
    )
}

fn slope_of<F: Fn(&OutageParams) -> Result<f64>>(
    grid_db: &[f64],
    m: usize,
    n_max: usize,
    f: F,
) -> Result<f64> {
    let mut pts = Vec::with_capacity(grid_db.len());
    for &db in grid_db {
        let p = params(db, m, n_max)?;
        pts.push((db, f(&p)?));
    }
    diversity_slope(&pts)
}

/// `(name, estimated slope, target order)` for the canonical high-SNR
/// checks: both selective-AF branches, opportunistic AF, and the two
/// selective-opportunistic bounds.
pub fn standard_slope_suite(cfg: &ExperimentConfig) -> Result<Vec<(String, f64, f64)>> {
    let _ = cfg; // grid and parameters are pinned by the checks themselves
    let grid_hi: Vec<f64> = (0..=10).map(|i| 30.0 + 1.5 * i as f64).collect();
    let grid_vhi: Vec<f64> = (0..=10).map(|i| 35.0 + 1.5 * i as f64).collect();
    let mut out = Vec::new();

    // Selective AF, threshold above the outage point: order n+1 = 4.
    let s = slope_of(&grid_hi, 1, 3, |p| {
        outage::p_out_saf(3, 3.0 * p.rate.delta(), p)
    })?;
    out.push(("saf(l=3) n=3".to_string(), s, 4.0));

    // Selective AF, threshold below the outage point: order 2.
    let s = slope_of(&grid_hi, 1, 3, |p| {
        outage::p_out_saf(3, 0.5 * p.rate.delta(), p)
    })?;
    out.push(("saf(l=0.5) n=3".to_string(), s, 2.0));

    // Opportunistic AF with three relays: order m+1 = 4.
    let s = slope_of(&grid_hi, 3, 3, |p| outage::p_out_oaf(3, p))?;
    out.push(("oaf m=3 n=3".to_string(), s, 4.0));

    // Type-A bound with three relays: order m+n = 6.
    let s = slope_of(&grid_hi, 3, 3, |p| {
        outage::p_out_soaf_a_lower_bound(3, 1.5 * p.rate.delta(), p)
    })?;
    out.push(("soaf-a-bound(l=1.5) m=3 n=3".to_string(), s, 6.0));

    // Overhearing bound with feasible per-hop thresholds: order m*n+1 = 10.
    let s = slope_of(&grid_vhi, 3, 3, |p| {
        let d = p.rate.delta();
        let tv = ThresholdVector::new(vec![3.9 * d, 3.9 * d, 3.9 * d])?;
        outage::p_out_soaf_b_lower_bound(3, &tv, p)
    })?;
    out.push(("soaf-b-bound(l=3.9) m=3 n=3".to_string(), s, 10.0));

    Ok(out)
}
