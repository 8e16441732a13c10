//! Scenario command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
//! failures.

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coop_arq::error::Error;
use coop_arq::experiments::{run_scenario, ExperimentConfig};
use coop_arq::fading::{variances_from_geometry, Geometry};
use coop_arq::outage::{OutageParams, RateSpec};
use coop_arq::tcm::code::{CodeRate, TrellisCode};
use coop_arq::tcm::spectrum::distance_spectrum;
use coop_arq::threshold::{
    find_effective_threshold, min_lambda_log_scale, CodeMetrics, SearchOptions, ThresholdRatios,
};

#[derive(Parser)]
#[command(
    name = "coop-arq",
    about = "Cooperative-ARQ link-level laboratory: outage analysis, protocol simulation, trellis-coded PER, threshold search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and emit a CSV.
    Run {
        /// Scenario name (e.g. saf-outage, soafb-outage, saf-per,
        /// soafb-per, harq-per, diversity-slopes, throughput-vs-snr).
        scenario: String,
        /// Key-value config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<String>,
        /// Master seed for every Monte-Carlo substream.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the distance spectrum of a trellis code as CSV.
    Spectra {
        /// Code rate tag: rate-1 .. rate-5.
        rate_tag: String,
        /// Squared-distance cap (defaults to 2.2x the minimum distance).
        #[arg(long)]
        cap: Option<f64>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Compute per-hop threshold schedules and print them as CSV.
    Thresholds {
        /// Assignment method: alg1 or logscale.
        #[arg(long)]
        method: String,
        /// Code rate tag supplying the distance metrics.
        #[arg(long, default_value = "rate-1")]
        code: String,
        /// SNR grid in dB, comma separated.
        #[arg(long, default_value = "10,20,30,40,50,60")]
        rho_db: String,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Threshold ratios, comma separated (defaults to 1,2,...).
        #[arg(long)]
        ratios: Option<String>,
        /// Distance margin.
        #[arg(long, default_value_t = 1e-5)]
        eps0: f64,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn write_out(path: Option<String>, body: String) -> coop_arq::Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(body.as_bytes())?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> coop_arq::Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            config,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    ExperimentConfig::from_text(&text)?
                }
                None => ExperimentConfig::default(),
            };
            cfg.scenario = scenario;
            cfg.seed = seed;
            if let Some(o) = out {
                cfg.out = o;
            }
            let written = run_scenario(&cfg)?;
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Spectra { rate_tag, cap, out } => {
            let rate = CodeRate::from_tag(&rate_tag)?;
            let code = TrellisCode::for_rate(rate);
            let cap = cap.unwrap_or_else(|| {
                coop_arq::experiments::throughput::expected_dmin(rate) * 2.2
            });
            let sp = distance_spectrum(&code, cap)?;
            let mut body = String::from("code,d_sq,omega_per_info_symbol\n");
            for line in &sp.lines {
                body.push_str(&format!(
                    "{},{:.10e},{:.10e}\n",
                    rate.tag(),
                    line.d_sq,
                    line.omega
                ));
            }
            write_out(out, body)
        }
        Command::Thresholds {
            method,
            code,
            rho_db,
            m,
            n,
            ratios,
            eps0,
            out,
        } => {
            let rate = CodeRate::from_tag(&code)?;
            let tc = TrellisCode::for_rate(rate);
            let kmax = m.min(n);
            let ratios = match ratios {
                Some(r) => ThresholdRatios::new(
                    r.split(',')
                        .map(|s| {
                            s.trim().parse::<f64>().map_err(|_| {
                                Error::Config(format!("bad ratio entry '{s}'"))
                            })
                        })
                        .collect::<coop_arq::Result<Vec<_>>>()?,
                )?,
                None => ThresholdRatios::default_for(kmax),
            };
            let cap = coop_arq::experiments::throughput::expected_dmin(rate) * 1.05;
            let sp = distance_spectrum(&tc, cap)?;
            let metrics = CodeMetrics::new(sp.d_min_sq(), sp.omega_min(), eps0)?;
            let geometry = Geometry::new(0.05, 0.5, 0.0, 3.0)?;
            let vars = variances_from_geometry(&geometry)?;
            let grid: Vec<f64> = rho_db
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad rho entry '{s}'")))
                })
                .collect::<coop_arq::Result<Vec<_>>>()?;

            let mut body = String::from("method,code,rho_db,hop,threshold\n");
            for &db in &grid {
                let rho = 10f64.powf(db / 10.0);
                let p = OutageParams::new(
                    RateSpec::from_rate(rate.bits() as f64)?,
                    m,
                    n,
                    vars,
                    rho,
                )?;
                let deltas: Vec<f64> = match method.as_str() {
                    "alg1" => {
                        let star =
                            find_effective_threshold(&ratios, &metrics, &p, &SearchOptions::default())?;
                        star.thresholds(&ratios).deltas().to_vec()
                    }
                    "logscale" => {
                        let lambda = min_lambda_log_scale(m, n, &ratios, &metrics);
                        ratios.v().iter().map(|&v| lambda * v * rho.ln()).collect()
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "unknown threshold method '{other}' (use alg1 or logscale)"
                        )))
                    }
                };
                for (hop, d) in deltas.iter().enumerate() {
                    body.push_str(&format!(
                        "{},{},{:.4},{},{:.10e}\n",
                        method,
                        rate.tag(),
                        db,
                        hop + 1,
                        d
                    ));
                }
            }
            write_out(out, body)
        }
    }
}
