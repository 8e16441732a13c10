//! Plain-text key-value scenario configuration.
//!
//! Format: one `key = value` pair per line; `#` starts a comment; optional
//! `[section]` headers are cosmetic. Defaults follow the reference setup:
//! three relays, three ARQ rounds, path-loss exponent 3, relay disk of
//! radius 0.05 centered at (0.5, 0), threshold ratios `[1, 2, 3]`,
//! `eps0 = 1e-5`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fading::Geometry;
use crate::protocol::ProtocolKind;
use crate::tcm::code::CodeRate;

/// Parsed scenario configuration with reference-setup defaults.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: String,
    /// SNR grid in dB.
    pub rho_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub protocols: Vec<ProtocolKind>,
    pub codes: Vec<CodeRate>,
    pub m: usize,
    pub n_max: usize,
    /// Spectral efficiency for outage scenarios.
    pub rate: f64,
    pub geometry: Geometry,
    /// Threshold multipliers on delta for explicit-threshold scenarios.
    pub lambda: Vec<f64>,
    /// Threshold source selector: "explicit", "alg1" or "logscale".
    pub threshold_method: String,
    pub eps0: f64,
    pub ratios: Vec<f64>,
    pub p_target: f64,
    pub placements: usize,
    pub info_symbols: usize,
    pub harq: bool,
    /// Output path; empty means stdout.
    pub out: String,
    /// Every key=value pair seen, for the CSV header.
    pub raw: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: String::new(),
            rho_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 100_000,
            seed: 1,
            protocols: vec![ProtocolKind::SoafB],
            codes: vec![CodeRate::R1],
            m: 3,
            n_max: 3,
            rate: 1.0,
            geometry: Geometry {
                s0: 0.05,
                s1: 0.5,
                s2: 0.0,
                eta: 3.0,
            },
            lambda: vec![3.9, 3.9, 3.9],
            threshold_method: "explicit".into(),
            eps0: 1e-5,
            ratios: vec![1.0, 2.0, 3.0],
            p_target: 1e-3,
            placements: 4,
            info_symbols: 128,
            harq: false,
            out: String::new(),
            raw: BTreeMap::new(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("bad entry '{s}' in {key}")))
        })
        .collect()
}

fn parse_protocol(s: &str) -> Result<ProtocolKind> {
    match s.trim() {
        "no-relay" | "norelay" => Ok(ProtocolKind::NoRelay),
        "af" => Ok(ProtocolKind::Af),
        "saf" => Ok(ProtocolKind::Saf),
        "oaf" => Ok(ProtocolKind::Oaf),
        "soaf-a" | "soafa" => Ok(ProtocolKind::SoafA),
        "soaf-b" | "soafb" => Ok(ProtocolKind::SoafB),
        "sodf-b" | "sodfb" => Ok(ProtocolKind::SodfB),
        other => Err(Error::Config(format!("unknown protocol '{other}'"))),
    }
}

impl ExperimentConfig {
    /// Parse a config-file body on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", ln + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Apply one key=value override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.raw.insert(key.to_string(), value.to_string());
        let bad = |k: &str, v: &str| Error::Config(format!("bad value '{v}' for {k}"));
        match key {
            "scenario" => self.scenario = value.to_string(),
            "rho_db" => self.rho_db = parse_list(value, key)?,
            "trials" => self.trials = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "protocols" | "protocol" => {
                self.protocols = value
                    .split(',')
                    .map(parse_protocol)
                    .collect::<Result<Vec<_>>>()?
            }
            "codes" | "code" => {
                self.codes = value
                    .split(',')
                    .map(|s| CodeRate::from_tag(s.trim()))
                    .collect::<Result<Vec<_>>>()?
            }
            "m" => self.m = value.parse().map_err(|_| bad(key, value))?,
            "n_max" | "N" => self.n_max = value.parse().map_err(|_| bad(key, value))?,
            "rate" | "R" => self.rate = value.parse().map_err(|_| bad(key, value))?,
            "s0" => self.geometry.s0 = value.parse().map_err(|_| bad(key, value))?,
            "s1" => self.geometry.s1 = value.parse().map_err(|_| bad(key, value))?,
            "s2" => self.geometry.s2 = value.parse().map_err(|_| bad(key, value))?,
            "eta" => self.geometry.eta = value.parse().map_err(|_| bad(key, value))?,
            "lambda" => self.lambda = parse_list(value, key)?,
            "threshold_method" | "thresholds" => self.threshold_method = value.to_string(),
            "eps0" => self.eps0 = value.parse().map_err(|_| bad(key, value))?,
            "ratios" | "v" => self.ratios = parse_list(value, key)?,
            "p_target" | "P_t" => self.p_target = value.parse().map_err(|_| bad(key, value))?,
            "placements" => self.placements = value.parse().map_err(|_| bad(key, value))?,
            "info_symbols" | "L" => {
                self.info_symbols = value.parse().map_err(|_| bad(key, value))?
            }
            "harq" => self.harq = value.parse().map_err(|_| bad(key, value))?,
            "out" => self.out = value.to_string(),
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Deterministic `key=value` lines for the CSV header.
    pub fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# scenario={}", self.scenario),
            format!("# seed={}", self.seed),
            format!("# m={} n_max={} rate={}", self.m, self.n_max, self.rate),
            format!(
                "# geometry s0={} s1={} s2={} eta={}",
                self.geometry.s0, self.geometry.s1, self.geometry.s2, self.geometry.eta
            ),
            format!("# trials={}", self.trials),
        ];
        for (k, v) in &self.raw {
            lines.push(format!("# cfg {k}={v}"));
        }
        lines
    }
}
