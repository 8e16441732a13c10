//! Renewal-reward throughput from per-round packet error rates, and the
//! rate-adaptive placement-averaged throughput scan.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{place_relays, ChannelModel, Geometry};
use crate::outage::RateSpec;
use crate::protocol::Protocol;
use crate::rng::SubRng;
use crate::tcm::code::{CodeRate, TrellisCode};
use crate::tcm::per::estimate_per_curve;
use crate::threshold::{find_effective_threshold, CodeMetrics, SearchOptions, ThresholdRatios, ThresholdVector};

/// Long-run throughput (bits per channel use) of an ARQ process with
/// per-round packet error rates `pers[n] = P_e_n` for `n = 0..=N`.
///
/// The value is `R * (1 - P_N) / E[rounds per packet]`, where the expected
/// round count includes the initial transmission:
/// `E[rounds] = 1 + sum_{n=0}^{N-1} P_n`. On an error-free channel every
/// packet takes exactly one round and the throughput is `R`; the denominator
/// is always at least one, so the metric never exceeds `R`.
pub fn throughput_metric(pers: &[f64], rate: f64, n_max: usize) -> Result<f64> {
    if pers.len() != n_max + 1 {
        return Err(Error::Domain(format!(
            "need N+1 = {} per-round PERs, got {}",
            n_max + 1,
            pers.len()
        )));
    }
    if pers.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Domain("PERs must lie in [0, 1]".into()));
    }
    for w in pers.windows(2) {
        if w[1] > w[0] + 1e-12 {
            return Err(Error::Domain("PER sequence must be nonincreasing".into()));
        }
    }
    let expected_rounds = 1.0 + pers[..n_max].iter().sum::<f64>();
    Ok(rate * (1.0 - pers[n_max]) / expected_rounds)
}

/// How thresholds are produced for the threshold-gated protocols.
#[derive(Debug, Clone)]
pub enum ThresholdSource {
    /// Explicit per-hop thresholds (linear SNR).
    Explicit(Vec<f64>),
    /// Effective threshold found per SNR point by bisection on the code-driven
    /// conditions.
    Searched { eps0: f64, ratios: Vec<f64> },
    /// Log-scale rule `lambda_e * v * ln(rho)`.
    LogScale { eps0: f64, ratios: Vec<f64> },
}

impl ThresholdSource {
    /// Resolve the thresholds for one (protocol, code, SNR) combination.
    pub fn resolve(
        &self,
        code: &TrellisCode,
        p: &crate::outage::OutageParams,
    ) -> Result<ThresholdVector> {
        match self {
            ThresholdSource::Explicit(v) => ThresholdVector::new(v.clone()),
            ThresholdSource::Searched { eps0, ratios } => {
                let kmax = p.m.min(p.n_max);
                let ratios = ThresholdRatios::new(ratios[..kmax.min(ratios.len())].to_vec())?;
                let sp = crate::tcm::spectrum::distance_spectrum(
                    code,
                    expected_dmin(code.rate) * 1.05,
                )?;
                let metrics = CodeMetrics::new(sp.d_min_sq(), sp.omega_min(), *eps0)?;
                let star = find_effective_threshold(&ratios, &metrics, p, &SearchOptions::default())?;
                Ok(star.thresholds(&ratios))
            }
            ThresholdSource::LogScale { eps0, ratios } => {
                let kmax = p.m.min(p.n_max);
                let ratios = ThresholdRatios::new(ratios[..kmax.min(ratios.len())].to_vec())?;
                let sp = crate::tcm::spectrum::distance_spectrum(
                    code,
                    expected_dmin(code.rate) * 1.05,
                )?;
                let metrics = CodeMetrics::new(sp.d_min_sq(), sp.omega_min(), *eps0)?;
                let lambda =
                    crate::threshold::min_lambda_log_scale(p.m, p.n_max, &ratios, &metrics);
                ThresholdVector::new(
                    ratios
                        .v()
                        .iter()
                        .map(|&v| lambda.max(1e-3) * v * p.rho.ln())
                        .collect(),
                )
            }
        }
    }
}

/// Spectrum-search caps sized just above each code's minimum distance.
pub fn expected_dmin(rate: CodeRate) -> f64 {
    match rate {
        CodeRate::R1 => 10.0,
        CodeRate::R2 => 4.0,
        CodeRate::R3 => 2.0,
        CodeRate::R4 => 1.0,
        CodeRate::R5 => 10.0 / 21.0,
    }
}

/// One throughput evaluation point.
#[derive(Debug, Clone)]
pub struct ThroughputPoint {
    pub rho_db: f64,
    /// Placement-averaged throughput (bits/channel use).
    pub value: f64,
    /// Chosen rates per placement (0 = infeasible).
    pub rates: Vec<usize>,
}

/// Settings for the rate-adaptive throughput scan.
#[derive(Debug, Clone)]
pub struct ThroughputScan {
    pub geometry: Geometry,
    pub m: usize,
    pub n_max: usize,
    /// Packet-loss-rate target on the final round.
    pub p_target: f64,
    pub placements: usize,
    pub trials: u64,
    pub info_symbols: usize,
    pub seed: u64,
    pub thresholds: ThresholdSource,
}

/// Placement-averaged rate-adaptive throughput of `proto` on an SNR grid.
///
/// Per placement and SNR the largest code rate whose final-round PER meets
/// the target is selected (throughput zero when none qualifies); the
/// throughput of the chosen rate is averaged over placements. Placements and
/// trial seeds are shared across protocols for paired comparisons.
pub fn rate_adapted_throughput(
    proto: Protocol,
    scan: &ThroughputScan,
    rho_db_grid: &[f64],
) -> Result<Vec<ThroughputPoint>> {
    let worst = crate::fading::variances_from_geometry(&scan.geometry)?;
    // Placements are drawn once from the scan seed.
    let mut placement_rng = SubRng::from_key(&[scan.seed, 0x706c]);
    let placements: Vec<Vec<(f64, f64)>> = (0..scan.placements)
        .map(|_| place_relays(&scan.geometry, scan.m, &mut placement_rng))
        .collect();

    let mut out = Vec::with_capacity(rho_db_grid.len());
    for (gi, &rho_db) in rho_db_grid.iter().enumerate() {
        let rho = 10f64.powf(rho_db / 10.0);
        let per_placement: Vec<(f64, usize)> = placements
            .par_iter()
            .enumerate()
            .map(|(pi, pos)| {
                let model = ChannelModel::from_positions(&scan.geometry, pos)
                    .expect("placement inside the unit geometry");
                let mut best = (0.0f64, 0usize);
                for rate_tag in CodeRate::all() {
                    let code = TrellisCode::for_rate(rate_tag);
                    let rate_bits = rate_tag.bits() as f64;
                    let rspec = RateSpec::from_rate(rate_bits).expect("positive rate");
                    let op = crate::outage::OutageParams::new(
                        rspec, scan.m, scan.n_max, worst, rho,
                    )
                    .expect("valid params");
                    let thresholds = match self_thresholds(proto, &scan.thresholds, &code, &op) {
                        Ok(t) => t,
                        Err(_) => continue,
                    };
                    let params = crate::protocol::SimParams::new(
                        rspec,
                        scan.m,
                        scan.n_max,
                        model.clone(),
                        rho,
                    )
                    .expect("valid params");
                    let seed = scan
                        .seed
                        .wrapping_mul(0x9e37_79b9)
                        .wrapping_add((gi as u64) << 32)
                        .wrapping_add((pi as u64) << 8)
                        .wrapping_add(rate_tag.bits() as u64);
                    let pers_ci = estimate_per_curve(
                        proto,
                        &code,
                        scan.info_symbols,
                        &params,
                        &thresholds,
                        scan.trials,
                        seed,
                    )
                    .expect("validated configuration");
                    let pers: Vec<f64> = pers_ci.iter().map(|x| x.0).collect();
                    if pers[scan.n_max] <= scan.p_target {
                        let t = throughput_metric(&pers, rate_bits, scan.n_max)
                            .expect("monotone PER curve");
                        if t > best.0 {
                            best = (t, rate_tag.bits());
                        }
                    } else {
                        // Rates are tried ascending and the loss rate only
                        // grows with the rate, so higher rates stay
                        // infeasible too.
                        break;
                    }
                }
                best
            })
            .collect();
        let value =
            per_placement.iter().map(|x| x.0).sum::<f64>() / per_placement.len().max(1) as f64;
        out.push(ThroughputPoint {
            rho_db,
            value,
            rates: per_placement.iter().map(|x| x.1).collect(),
        });
    }
    Ok(out)
}

fn self_thresholds(
    proto: Protocol,
    source: &ThresholdSource,
    code: &TrellisCode,
    op: &crate::outage::OutageParams,
) -> Result<ThresholdVector> {
    if proto.kind.thresholds_needed(op.m, op.n_max) == 0 {
        return ThresholdVector::new(vec![]);
    }
    source.resolve(code, op)
}
