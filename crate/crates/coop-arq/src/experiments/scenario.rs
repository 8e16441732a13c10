//! Scenario front end: figure-family reproduction driven by a config.
//!
//! Each scenario produces one deterministic CSV. Analytic and Monte-Carlo
//! columns appear as separate rows distinguished by the `flags` field.

use std::io::Write;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::csv::{mc_flags, write_csv, CurvePoint};
use crate::experiments::throughput::{
    rate_adapted_throughput, ThresholdSource, ThroughputScan,
};
use crate::fading::{variances_from_geometry, ChannelModel};
use crate::outage::{self, OutageParams, RateSpec};
use crate::protocol::{estimate_outage_curve, Protocol, ProtocolKind, SimParams};
use crate::tcm::code::TrellisCode;
use crate::tcm::per::estimate_per_curve;
use crate::threshold::ThresholdVector;

/// Runs the configured scenario and returns the CSV destination(s).
///
/// With an empty `out` the CSV goes to stdout and the returned list is
/// empty.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let points = match cfg.scenario.as_str() {
        "saf-outage" => saf_outage(cfg)?,
        "oaf-soafa-outage" => oaf_soafa_outage(cfg)?,
        "soafb-outage" => soafb_outage(cfg)?,
        "saf-lambda" => saf_lambda(cfg)?,
        "diversity-slopes" => diversity_slopes(cfg)?,
        "saf-per" => saf_per(cfg)?,
        "soafb-per" => soafb_per(cfg)?,
        "harq-per" => harq_per(cfg)?,
        "throughput-vs-snr" => throughput_vs_snr(cfg)?,
        "throughput-vs-pt" => throughput_vs_pt(cfg)?,
        other => return Err(Error::Config(format!("unknown scenario '{other}'"))),
    };
    emit(cfg, &points)
}

fn emit(cfg: &ExperimentConfig, points: &[CurvePoint]) -> Result<Vec<PathBuf>> {
    let header = cfg.header_lines();
    if cfg.out.is_empty() {
        let stdout = std::io::stdout();
        write_csv(stdout.lock(), &header, points)?;
        Ok(vec![])
    } else {
        let path = PathBuf::from(&cfg.out);
        let mut buf = Vec::new();
        write_csv(&mut buf, &header, points)?;
        let mut f = std::fs::File::create(&path)?;
        f.write_all(&buf)?;
        Ok(vec![path])
    }
}

fn outage_params(cfg: &ExperimentConfig, rho_db: f64) -> Result<OutageParams> {
    let vars = variances_from_geometry(&cfg.geometry)?;
    OutageParams::new(
        RateSpec::from_rate(cfg.rate)?,
        cfg.m,
        cfg.n_max,
        vars,
        10f64.powf(rho_db / 10.0),
    )
}

fn sim_params(cfg: &ExperimentConfig, rho_db: f64) -> Result<SimParams> {
    let vars = variances_from_geometry(&cfg.geometry)?;
    SimParams::new(
        RateSpec::from_rate(cfg.rate)?,
        cfg.m,
        cfg.n_max,
        ChannelModel::WorstCase(vars),
        10f64.powf(rho_db / 10.0),
    )
}

fn point(
    cfg: &ExperimentConfig,
    protocol: &str,
    code: &str,
    rho_db: f64,
    n: usize,
    value: f64,
    ci: Option<f64>,
    flags: &str,
) -> CurvePoint {
    CurvePoint {
        scenario: cfg.scenario.clone(),
        protocol: protocol.into(),
        code: code.into(),
        rho_db,
        n,
        value,
        ci,
        flags: flags.into(),
    }
}

/// Single-relay selective AF: analytic exact, analytic bound, Monte-Carlo,
/// for each threshold multiplier in `lambda`.
fn saf_outage(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for &lam in &cfg.lambda {
        let label = format!("saf(l={lam})");
        for &rho_db in &cfg.rho_db {
            let op = outage_params(cfg, rho_db)?;
            let thresh = lam * op.rate.delta();
            let sp = sim_params(cfg, rho_db)?;
            let tv = ThresholdVector::new(vec![thresh])?;
            let mc = estimate_outage_curve(
                Protocol::arq(ProtocolKind::Saf),
                &sp,
                &tv,
                cfg.trials,
                cfg.seed,
            )?;
            for n in 0..=cfg.n_max {
                let exact = outage::p_out_saf(n, thresh, &op)?;
                let bound = outage::p_out_saf_lower_bound(n, thresh, &op)?;
                out.push(point(cfg, &label, "", rho_db, n, exact, None, "analytic"));
                out.push(point(cfg, &label, "", rho_db, n, bound, None, "bound"));
                out.push(point(
                    cfg,
                    &label,
                    "",
                    rho_db,
                    n,
                    mc[n].0,
                    Some(mc[n].1),
                    &mc_flags(mc[n].0, cfg.trials),
                ));
            }
        }
    }
    Ok(out)
}

/// Opportunistic AF and type-A selective-opportunistic AF, analytic + MC.
fn oaf_soafa_outage(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let lam = cfg.lambda.first().copied().unwrap_or(1.5);
    for &rho_db in &cfg.rho_db {
        let op = outage_params(cfg, rho_db)?;
        let sp = sim_params(cfg, rho_db)?;
        let thresh = lam * op.rate.delta();
        let tv = ThresholdVector::new(vec![thresh])?;
        let mc_oaf = estimate_outage_curve(
            Protocol::arq(ProtocolKind::Oaf),
            &sp,
            &ThresholdVector::new(vec![])?,
            cfg.trials,
            cfg.seed,
        )?;
        let mc_a = estimate_outage_curve(
            Protocol::arq(ProtocolKind::SoafA),
            &sp,
            &tv,
            cfg.trials,
            cfg.seed,
        )?;
        for n in 0..=cfg.n_max {
            out.push(point(cfg, "oaf", "", rho_db, n, outage::p_out_oaf(n, &op)?, None, "analytic"));
            out.push(point(
                cfg,
                "oaf",
                "",
                rho_db,
                n,
                mc_oaf[n].0,
                Some(mc_oaf[n].1),
                &mc_flags(mc_oaf[n].0, cfg.trials),
            ));
            let label = format!("soaf-a(l={lam})");
            out.push(point(
                cfg,
                &label,
                "",
                rho_db,
                n,
                outage::p_out_soaf_a(n, thresh, &op)?,
                None,
                "analytic",
            ));
            out.push(point(
                cfg,
                &label,
                "",
                rho_db,
                n,
                outage::p_out_soaf_a_lower_bound(n, thresh, &op)?,
                None,
                "bound",
            ));
            out.push(point(
                cfg,
                &label,
                "",
                rho_db,
                n,
                mc_a[n].0,
                Some(mc_a[n].1),
                &mc_flags(mc_a[n].0, cfg.trials),
            ));
        }
    }
    Ok(out)
}

/// Overhearing protocol versus its analytic lower bound.
fn soafb_outage(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for &rho_db in &cfg.rho_db {
        let op = outage_params(cfg, rho_db)?;
        let sp = sim_params(cfg, rho_db)?;
        let delta = op.rate.delta();
        let kmax = cfg.m.min(cfg.n_max);
        if cfg.lambda.len() < kmax {
            return Err(Error::Config(format!(
                "soafb-outage needs {kmax} lambda entries"
            )));
        }
        let tv = ThresholdVector::new(
            cfg.lambda[..kmax].iter().map(|&l| l * delta).collect(),
        )?;
        let mc = estimate_outage_curve(
            Protocol::arq(ProtocolKind::SoafB),
            &sp,
            &tv,
            cfg.trials,
            cfg.seed,
        )?;
        let label = format!("soaf-b(l={:?})", &cfg.lambda[..kmax]);
        for n in 0..=cfg.n_max {
            out.push(point(
                cfg,
                &label,
                "",
                rho_db,
                n,
                outage::p_out_soaf_b_lower_bound(n, &tv, &op)?,
                None,
                "bound",
            ));
            out.push(point(
                cfg,
                &label,
                "",
                rho_db,
                n,
                mc[n].0,
                Some(mc[n].1),
                &mc_flags(mc[n].0, cfg.trials),
            ));
        }
    }
    Ok(out)
}

/// Required SNR against the threshold multiplier for a target final-round
/// outage.
fn saf_lambda(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let target = cfg.p_target;
    for &lam in &cfg.lambda {
        // Bisection on rho (dB) for P_out_N(rho, lambda*delta) = target.
        let eval = |rho_db: f64| -> Result<f64> {
            let op = outage_params(cfg, rho_db)?;
            outage::p_out_saf(cfg.n_max, lam * op.rate.delta(), &op)
        };
        let (mut lo, mut hi) = (-10.0f64, 60.0f64);
        if eval(lo)? < target {
            continue;
        }
        let mut found = true;
        while eval(hi)? > target {
            hi += 10.0;
            if hi > 200.0 {
                found = false;
                break;
            }
        }
        if !found {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if eval(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(point(
            cfg,
            &format!("saf(l={lam})"),
            "",
            hi,
            cfg.n_max,
            hi,
            None,
            "analytic",
        ));
    }
    Ok(out)
}

/// High-SNR slopes of the analytic forms.
fn diversity_slopes(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let entries = crate::experiments::slopes::standard_slope_suite(cfg)?;
    for (name, slope, want) in entries {
        out.push(CurvePoint {
            scenario: cfg.scenario.clone(),
            protocol: name,
            code: "".into(),
            rho_db: 0.0,
            n: cfg.n_max,
            value: slope,
            ci: None,
            flags: format!("analytic;target={want}"),
        });
    }
    Ok(out)
}

/// Packet error rates of single-relay selective AF with a trellis code.
fn saf_per(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let code = TrellisCode::for_rate(cfg.codes[0]);
    for &lam in &cfg.lambda {
        for &rho_db in &cfg.rho_db {
            let mut sp = sim_params(cfg, rho_db)?;
            sp.rate = RateSpec::from_rate(code.rate.bits() as f64)?;
            let thresh = lam * sp.rate.delta();
            let tv = ThresholdVector::new(vec![thresh])?;
            let per = estimate_per_curve(
                Protocol {
                    kind: ProtocolKind::Saf,
                    harq: cfg.harq,
                },
                &code,
                cfg.info_symbols,
                &sp,
                &tv,
                cfg.trials,
                cfg.seed,
            )?;
            for n in 0..=cfg.n_max {
                out.push(point(
                    cfg,
                    &format!("saf(l={lam})"),
                    code.rate.tag(),
                    rho_db,
                    n,
                    per[n].0,
                    Some(per[n].1),
                    &mc_flags(per[n].0, cfg.trials),
                ));
            }
        }
    }
    Ok(out)
}

fn resolve_thresholds(
    cfg: &ExperimentConfig,
    code: &TrellisCode,
    op: &OutageParams,
) -> Result<ThresholdVector> {
    let kmax = cfg.m.min(cfg.n_max);
    match cfg.threshold_method.as_str() {
        "explicit" => {
            let delta = op.rate.delta();
            ThresholdVector::new(cfg.lambda[..kmax].iter().map(|&l| l * delta).collect())
        }
        "alg1" => ThresholdSource::Searched {
            eps0: cfg.eps0,
            ratios: cfg.ratios.clone(),
        }
        .resolve(code, op),
        "logscale" => ThresholdSource::LogScale {
            eps0: cfg.eps0,
            ratios: cfg.ratios.clone(),
        }
        .resolve(code, op),
        other => Err(Error::Config(format!("unknown threshold method '{other}'"))),
    }
}

/// Overhearing-protocol PER with configurable threshold method; also emits
/// the analytic outage bound for reference.
fn soafb_per(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let code = TrellisCode::for_rate(cfg.codes[0]);
    for &rho_db in &cfg.rho_db {
        let mut sp = sim_params(cfg, rho_db)?;
        sp.rate = RateSpec::from_rate(code.rate.bits() as f64)?;
        let mut op = outage_params(cfg, rho_db)?;
        op.rate = sp.rate;
        let tv = resolve_thresholds(cfg, &code, &op)?;
        let per = estimate_per_curve(
            Protocol {
                kind: ProtocolKind::SoafB,
                harq: cfg.harq,
            },
            &code,
            cfg.info_symbols,
            &sp,
            &tv,
            cfg.trials,
            cfg.seed,
        )?;
        let label = format!("soaf-b({})", cfg.threshold_method);
        for n in 0..=cfg.n_max {
            out.push(point(
                cfg,
                &label,
                code.rate.tag(),
                rho_db,
                n,
                per[n].0,
                Some(per[n].1),
                &mc_flags(per[n].0, cfg.trials),
            ));
            out.push(point(
                cfg,
                &label,
                code.rate.tag(),
                rho_db,
                n,
                outage::p_out_soaf_b_lower_bound(n, &tv, &op)?,
                None,
                "bound",
            ));
        }
    }
    Ok(out)
}

/// Paired ARQ/HARQ packet error rates.
fn harq_per(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let code = TrellisCode::for_rate(cfg.codes[0]);
    for &rho_db in &cfg.rho_db {
        let mut sp = sim_params(cfg, rho_db)?;
        sp.rate = RateSpec::from_rate(code.rate.bits() as f64)?;
        let mut op = outage_params(cfg, rho_db)?;
        op.rate = sp.rate;
        for kind in cfg.protocols.iter().copied() {
            let tv = if kind.thresholds_needed(cfg.m, cfg.n_max) > 0 {
                resolve_thresholds(cfg, &code, &op)?
            } else {
                ThresholdVector::new(vec![])?
            };
            for harq in [false, true] {
                let per = estimate_per_curve(
                    Protocol { kind, harq },
                    &code,
                    cfg.info_symbols,
                    &sp,
                    &tv,
                    cfg.trials,
                    cfg.seed,
                )?;
                let label = format!(
                    "{}{}",
                    if harq { "harq-" } else { "arq-" },
                    kind.label()
                );
                for n in 0..=cfg.n_max {
                    out.push(point(
                        cfg,
                        &label,
                        code.rate.tag(),
                        rho_db,
                        n,
                        per[n].0,
                        Some(per[n].1),
                        &mc_flags(per[n].0, cfg.trials),
                    ));
                }
            }
        }
    }
    Ok(out)
}

fn scan_of(cfg: &ExperimentConfig) -> ThroughputScan {
    ThroughputScan {
        geometry: cfg.geometry,
        m: cfg.m,
        n_max: cfg.n_max,
        p_target: cfg.p_target,
        placements: cfg.placements,
        trials: cfg.trials,
        info_symbols: cfg.info_symbols,
        seed: cfg.seed,
        thresholds: match cfg.threshold_method.as_str() {
            "logscale" => ThresholdSource::LogScale {
                eps0: cfg.eps0,
                ratios: cfg.ratios.clone(),
            },
            _ => ThresholdSource::Searched {
                eps0: cfg.eps0,
                ratios: cfg.ratios.clone(),
            },
        },
    }
}

/// Placement-averaged rate-adaptive throughput over the SNR grid.
fn throughput_vs_snr(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let scan = scan_of(cfg);
    for kind in cfg.protocols.iter().copied() {
        let proto = Protocol {
            kind,
            harq: cfg.harq,
        };
        for tp in rate_adapted_throughput(proto, &scan, &cfg.rho_db)? {
            out.push(point(
                cfg,
                kind.label(),
                "adaptive",
                tp.rho_db,
                cfg.n_max,
                tp.value,
                None,
                "mc",
            ));
        }
    }
    Ok(out)
}

/// Throughput against the loss target at a fixed SNR (first grid entry).
fn throughput_vs_pt(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    let rho_db = *cfg.rho_db.first().ok_or_else(|| {
        Error::Config("throughput-vs-pt needs one rho_db entry".into())
    })?;
    let targets = [1e-1, 1e-2, 1e-3, 1e-4];
    for kind in cfg.protocols.iter().copied() {
        let proto = Protocol {
            kind,
            harq: cfg.harq,
        };
        for &pt in &targets {
            let mut scan = scan_of(cfg);
            scan.p_target = pt;
            let tp = rate_adapted_throughput(proto, &scan, &[rho_db])?;
            out.push(point(
                cfg,
                kind.label(),
                "adaptive",
                rho_db,
                cfg.n_max,
                tp[0].value,
                None,
                &format!("mc;p_target={pt:e}"),
            ));
        }
    }
    Ok(out)
}
