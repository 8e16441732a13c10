//! Monte-Carlo execution of the ARQ relaying protocols at outage level.
//!
//! One trial is one packet lifetime: the initial source transmission plus up
//! to `N` retransmission rounds. Success in a round means the instantaneous
//! destination SNR reaches the outage threshold; the hybrid variant instead
//! accumulates the per-round SNRs before the comparison. All randomness comes
//! from named substreams ([`crate::rng`]), so trials can be partitioned over
//! workers with exact reproducibility.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fading::{af_multi_hop_snr, af_two_hop_snr, ChannelModel};
use crate::outage::RateSpec;
use crate::rng::{LinkClass, TrialRng};
use crate::threshold::ThresholdVector;

/// The relaying protocols the engine can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    /// Source-only retransmissions (baseline).
    NoRelay,
    /// Single-relay amplify-and-forward (selective with zero threshold).
    Af,
    /// Single-relay selective amplify-and-forward.
    Saf,
    /// Per-round best-cascade opportunistic amplify-and-forward.
    Oaf,
    /// Selective-opportunistic AF; qualification from source transmissions.
    SoafA,
    /// Selective-opportunistic AF; the qualified set also grows by
    /// overhearing relayed transmissions.
    SoafB,
    /// Decode-and-forward counterpart of the overhearing protocol.
    SodfB,
}

impl ProtocolKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProtocolKind::NoRelay => "no-relay",
            ProtocolKind::Af => "af",
            ProtocolKind::Saf => "saf",
            ProtocolKind::Oaf => "oaf",
            ProtocolKind::SoafA => "soaf-a",
            ProtocolKind::SoafB => "soaf-b",
            ProtocolKind::SodfB => "sodf-b",
        }
    }

    /// Number of threshold entries the protocol needs.
    pub fn thresholds_needed(&self, m: usize, n_max: usize) -> usize {
        match self {
            ProtocolKind::Saf | ProtocolKind::SoafA => 1,
            ProtocolKind::SoafB => m.min(n_max),
            _ => 0,
        }
    }
}

/// Protocol selector plus the hybrid (SNR-accumulating) switch.
#[derive(Debug, Clone, Copy)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub harq: bool,
}

impl Protocol {
    pub fn arq(kind: ProtocolKind) -> Self {
        Protocol { kind, harq: false }
    }

    pub fn harq(kind: ProtocolKind) -> Self {
        Protocol { kind, harq: true }
    }
}

/// Simulation parameters shared by all trials of a run.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub rate: RateSpec,
    pub m: usize,
    /// Maximum retransmission rounds after the initial transmission.
    pub n_max: usize,
    pub model: ChannelModel,
    /// Average SNR (linear).
    pub rho: f64,
}

impl SimParams {
    pub fn new(rate: RateSpec, m: usize, n_max: usize, model: ChannelModel, rho: f64) -> Result<Self> {
        if m < 1 || n_max < 1 {
            return Err(Error::Domain("need m >= 1 and N >= 1".into()));
        }
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("rho must be > 0, got {rho}")));
        }
        Ok(SimParams {
            rate,
            m,
            n_max,
            model,
            rho,
        })
    }
}

/// Who transmitted in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transmitter {
    Source,
    Relay(usize),
}

/// Per-round trace record.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundEvent {
    pub round: u32,
    pub transmitter: Transmitter,
    /// Instantaneous SNR seen by the destination this round (per-round, not
    /// accumulated).
    pub dest_snr: f64,
    /// Relays newly added to the qualified set after this round.
    pub newly_qualified: u32,
}

/// Outcome of one packet lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    /// First successful round index, or `N` when the packet was dropped.
    pub rounds_used: u32,
    pub events: Vec<RoundEvent>,
}

/// Frozen qualification state of one relay.
#[derive(Debug, Clone)]
pub struct RelayState {
    pub qualified: bool,
    /// Hops the stored signal went through before reaching this relay.
    pub hop_count: u32,
    /// Gains along the stored signal's path `[a1, c2, ..., ck]`; frozen once
    /// qualified.
    pub chain: Vec<f64>,
}

impl RelayState {
    fn fresh() -> Self {
        RelayState {
            qualified: false,
            hop_count: 0,
            chain: Vec::new(),
        }
    }
}

fn check_thresholds(kind: ProtocolKind, thresholds: &ThresholdVector, m: usize, n_max: usize) -> Result<()> {
    let need = kind.thresholds_needed(m, n_max);
    if thresholds.len() < need {
        return Err(Error::Config(format!(
            "protocol {} needs {need} thresholds, got {}",
            kind.label(),
            thresholds.len()
        )));
    }
    Ok(())
}

/// Core of one outage-level trial; `on_event` observes each round.
fn run_trial_core<F: FnMut(RoundEvent)>(
    proto: Protocol,
    params: &SimParams,
    thresholds: &ThresholdVector,
    rng: &TrialRng,
    mut on_event: F,
) -> Result<(bool, u32)> {
    check_thresholds(proto.kind, thresholds, params.m, params.n_max)?;

    let delta = params.rate.delta();
    let rho = params.rho;
    let m = params.m;
    let model = &params.model;
    // Single-relay protocols act on relay 0 only.
    let single_relay = matches!(proto.kind, ProtocolKind::Af | ProtocolKind::Saf);
    let relay_count = match proto.kind {
        ProtocolKind::NoRelay => 0,
        _ if single_relay => 1,
        _ => m,
    };
    let first_hop_gate = match proto.kind {
        ProtocolKind::Af | ProtocolKind::Oaf => 0.0,
        ProtocolKind::Saf | ProtocolKind::SoafA | ProtocolKind::SoafB => thresholds.deltas()[0],
        ProtocolKind::SodfB => delta,
        ProtocolKind::NoRelay => f64::INFINITY,
    };

    let mut relays: Vec<RelayState> = (0..relay_count).map(|_| RelayState::fresh()).collect();
    let mut qualified_frozen = false; // SOAF-A freezes Q at first nonempty formation
    let mut acc_snr = 0.0f64;

    let mut success_round: Option<u32> = None;

    for round in 0..=(params.n_max as u32) {
        let any_qualified = relays.iter().any(|r| r.qualified);
        let (transmitter, snr, newly) = if !any_qualified {
            // Source transmission; relays overhear it afterwards.
            let w = rng.stream(round, LinkClass::SourceDest, 0).exp(rho * model.beta0());
            let mut newly = 0u32;
            let may_overhear = match proto.kind {
                ProtocolKind::NoRelay => false,
                ProtocolKind::SoafA => !qualified_frozen,
                _ => true,
            };
            if may_overhear {
                for (j, st) in relays.iter_mut().enumerate() {
                    if st.qualified {
                        continue;
                    }
                    let a = rng
                        .stream(round, LinkClass::SourceRelay, j as u32)
                        .exp(rho * model.beta_sr(j));
                    if a > first_hop_gate {
                        st.qualified = true;
                        st.hop_count = 1;
                        st.chain = vec![a];
                        newly += 1;
                    }
                }
                if newly > 0 && proto.kind == ProtocolKind::SoafA {
                    qualified_frozen = true;
                }
            }
            (Transmitter::Source, w, newly)
        } else {
            match proto.kind {
                ProtocolKind::Oaf => {
                    // Per-round argmax of the cascaded two-hop SNR with the
                    // round-0 source gains frozen.
                    let mut best = (0usize, f64::NEG_INFINITY);
                    for (j, st) in relays.iter().enumerate() {
                        let b = rng
                            .stream(round, LinkClass::RelayDest, j as u32)
                            .exp(rho * model.beta_rd(j));
                        let s = af_two_hop_snr(st.chain[0], b);
                        if s > best.1 {
                            best = (j, s);
                        }
                    }
                    (Transmitter::Relay(best.0), best.1, 0)
                }
                _ => {
                    // Opportunistic selection on the relay-destination gain
                    // among qualified relays; ties break to the lowest index.
                    let mut sel = usize::MAX;
                    let mut sel_b = f64::NEG_INFINITY;
                    for (j, st) in relays.iter().enumerate() {
                        if !st.qualified {
                            continue;
                        }
                        let b = rng
                            .stream(round, LinkClass::RelayDest, j as u32)
                            .exp(rho * model.beta_rd(j));
                        if b > sel_b {
                            sel = j;
                            sel_b = b;
                        }
                    }
                    let st = &relays[sel];
                    let snr = match proto.kind {
                        ProtocolKind::SodfB => sel_b,
                        _ => af_multi_hop_snr(&st.chain, sel_b),
                    };
                    // Overhearing of the relayed transmission (type B only).
                    let mut newly = 0u32;
                    if matches!(proto.kind, ProtocolKind::SoafB | ProtocolKind::SodfB) {
                        let hop_new = relays[sel].hop_count + 1;
                        let within = (hop_new as usize) <= thresholds.len()
                            || proto.kind == ProtocolKind::SodfB;
                        if within {
                            let gate = match proto.kind {
                                ProtocolKind::SodfB => delta,
                                _ => thresholds.deltas()[(hop_new - 1) as usize],
                            };
                            let parent_chain = relays[sel].chain.clone();
                            for j in 0..relays.len() {
                                if relays[j].qualified {
                                    continue;
                                }
                                let c = rng
                                    .stream(round, LinkClass::RelayRelay, j as u32)
                                    .exp(rho * model.beta_rr(sel, j));
                                if c > gate {
                                    relays[j].qualified = true;
                                    relays[j].hop_count = hop_new;
                                    let mut chain = parent_chain.clone();
                                    chain.push(c);
                                    relays[j].chain = chain;
                                    newly += 1;
                                }
                            }
                        }
                    }
                    (Transmitter::Relay(sel), snr, newly)
                }
            }
        };

        acc_snr += snr;
        let effective = if proto.harq { acc_snr } else { snr };
        let ok = effective >= delta;
        on_event(RoundEvent {
            round,
            transmitter,
            dest_snr: snr,
            newly_qualified: newly,
        });
        if ok {
            success_round = Some(round);
            break;
        }
    }

    match success_round {
        Some(r) => Ok((true, r)),
        None => Ok((false, params.n_max as u32)),
    }
}

/// Executes one packet lifetime at outage level and returns the trace.
pub fn run_outage_trial(
    proto: Protocol,
    params: &SimParams,
    thresholds: &ThresholdVector,
    rng: &TrialRng,
) -> Result<TrialOutcome> {
    let mut events = Vec::with_capacity(params.n_max + 1);
    let (success, rounds_used) =
        run_trial_core(proto, params, thresholds, rng, |e| events.push(e))?;
    Ok(TrialOutcome {
        success,
        rounds_used,
        events,
    })
}

/// Hybrid variant: the destination accumulates effective SNR across rounds.
pub fn run_harq_outage_trial(
    proto: Protocol,
    params: &SimParams,
    thresholds: &ThresholdVector,
    rng: &TrialRng,
) -> Result<TrialOutcome> {
    run_outage_trial(
        Protocol {
            kind: proto.kind,
            harq: true,
        },
        params,
        thresholds,
        rng,
    )
}

/// Outage estimate after each round `n = 0..=N`: fraction of trials with no
/// success in rounds `0..=n`, with a 3-sigma binomial half-width.
///
/// Deterministic for a fixed seed regardless of worker count: failures are
/// accumulated as integer counts.
pub fn estimate_outage_curve(
    proto: Protocol,
    params: &SimParams,
    thresholds: &ThresholdVector,
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if trials < 1 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    check_thresholds(proto.kind, thresholds, params.m, params.n_max)?;
    let n_max = params.n_max;
    let chunk = 65_536u64;
    let n_chunks = trials.div_ceil(chunk);
    let fail_counts: Vec<u64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(trials);
            let mut counts = vec![0u64; n_max + 1];
            for t in lo..hi {
                let rng = TrialRng::new(seed, t);
                let (success, round) = run_trial_core(proto, params, thresholds, &rng, |_| {})
                    .expect("thresholds validated above");
                let first_ok = if success { round as usize } else { usize::MAX };
                for (n, slot) in counts.iter_mut().enumerate() {
                    if first_ok > n {
                        *slot += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n_max + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(fail_counts
        .iter()
        .map(|&f| {
            let p = f as f64 / trials as f64;
            let ci = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
            (p, ci)
        })
        .collect())
}

/// Outage estimate after round `n` only.
pub fn estimate_outage(
    proto: Protocol,
    n: usize,
    params: &SimParams,
    thresholds: &ThresholdVector,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if n > params.n_max {
        return Err(Error::Domain(format!("n = {n} exceeds N = {}", params.n_max)));
    }
    Ok(estimate_outage_curve(proto, params, thresholds, trials, seed)?[n])
}
