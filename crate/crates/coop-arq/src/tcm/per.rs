//! Packet-level Monte-Carlo: the ARQ protocols executed on actual coded
//! waveforms, with amplify-and-forward vector relaying, coherent sequence
//! detection at the destination, and optional combining across rounds.
//!
//! Control flow mirrors [`crate::protocol`]: qualification gates on link
//! gains, opportunistic selection on relay-destination gains, a single
//! transmitter per round. What changes is the payload: relays store and
//! forward their received vectors, the destination decodes and a genie
//! compares the decision to the transmitted bits (acknowledgments are ideal).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::protocol::{Protocol, ProtocolKind, RoundEvent, SimParams, Transmitter, TrialOutcome};
use crate::rng::{LinkClass, TrialRng};
use crate::tcm::code::TrellisCode;
use crate::tcm::relay::{af_relay_forward, mrc_combine, RelayedObservation};
use crate::tcm::viterbi::viterbi_mlsd;
use crate::threshold::ThresholdVector;

/// Per-relay state at packet level.
struct PerRelay {
    qualified: bool,
    hop_count: u32,
    stored: Option<RelayedObservation>,
}

/// Draw the gain (first value) and phase (second value) of a substream.
fn gain_phase(rng: &TrialRng, round: u32, link: LinkClass, idx: u32, mean: f64) -> (f64, f64, crate::rng::SubRng) {
    let mut s = rng.stream(round, link, idx);
    let g = s.exp(mean);
    let ph = s.phase();
    (g, ph, s)
}

/// One packet lifetime at PER level.
pub fn run_per_trial(
    proto: Protocol,
    code: &TrellisCode,
    info_symbols: usize,
    params: &SimParams,
    thresholds: &ThresholdVector,
    rng: &TrialRng,
) -> Result<TrialOutcome> {
    let need = proto.kind.thresholds_needed(params.m, params.n_max);
    if thresholds.len() < need {
        return Err(Error::Config(format!(
            "protocol {} needs {need} thresholds, got {}",
            proto.kind.label(),
            thresholds.len()
        )));
    }
    let rho = params.rho;
    let m = params.m;
    let model = &params.model;
    let single_relay = matches!(proto.kind, ProtocolKind::Af | ProtocolKind::Saf);
    let relay_count = match proto.kind {
        ProtocolKind::NoRelay => 0,
        _ if single_relay => 1,
        _ => m,
    };
    let first_hop_gate = match proto.kind {
        ProtocolKind::Af | ProtocolKind::Oaf => 0.0,
        ProtocolKind::Saf | ProtocolKind::SoafA | ProtocolKind::SoafB => thresholds.deltas()[0],
        ProtocolKind::SodfB => 0.0, // gate is the decode outcome
        ProtocolKind::NoRelay => f64::INFINITY,
    };

    // Payload and clean codeword.
    let bits: Vec<bool> = {
        let mut s = rng.stream(0, LinkClass::Payload, 0);
        (0..info_symbols * code.bits()).map(|_| s.bit()).collect()
    };
    let clean = RelayedObservation::source(code.encode(&bits, info_symbols)?);

    let mut relays: Vec<PerRelay> = (0..relay_count)
        .map(|_| PerRelay {
            qualified: false,
            hop_count: 0,
            stored: None,
        })
        .collect();
    let mut qualified_frozen = false;
    let mut received: Vec<RelayedObservation> = Vec::new(); // destination buffer
    let mut events = Vec::with_capacity(params.n_max + 1);
    let mut success_round: Option<u32> = None;

    for round in 0..=(params.n_max as u32) {
        let any_qualified = relays.iter().any(|r| r.qualified);
        let transmitter;
        let mut newly = 0u32;
        let dest_obs: RelayedObservation;

        if !any_qualified {
            // Source transmission.
            let (w, ph, mut noise) =
                gain_phase(rng, round, LinkClass::SourceDest, 0, rho * model.beta0());
            dest_obs = af_relay_forward(&clean, w, ph, &mut noise)?;
            transmitter = Transmitter::Source;

            let may_overhear = match proto.kind {
                ProtocolKind::NoRelay => false,
                ProtocolKind::SoafA => !qualified_frozen,
                _ => true,
            };
            if may_overhear {
                for j in 0..relays.len() {
                    if relays[j].qualified {
                        continue;
                    }
                    let (a, ph, mut noise) = gain_phase(
                        rng,
                        round,
                        LinkClass::SourceRelay,
                        j as u32,
                        rho * model.beta_sr(j),
                    );
                    // Materialize the received vector only when it can
                    // matter: gain-gated protocols discard failed receptions
                    // untouched, decode-gated ones must decode to decide.
                    if proto.kind == ProtocolKind::SodfB {
                        let rx = af_relay_forward(&clean, a, ph, &mut noise)?;
                        if viterbi_mlsd(&rx, code, info_symbols)? == bits {
                            relays[j].qualified = true;
                            relays[j].hop_count = 1;
                            // Decode-and-forward relays hold a clean
                            // re-encoding.
                            relays[j].stored = Some(clean.clone());
                            newly += 1;
                        }
                    } else if a > first_hop_gate {
                        let rx = af_relay_forward(&clean, a, ph, &mut noise)?;
                        relays[j].qualified = true;
                        relays[j].hop_count = 1;
                        relays[j].stored = Some(rx);
                        newly += 1;
                    }
                }
                if newly > 0 && proto.kind == ProtocolKind::SoafA {
                    qualified_frozen = true;
                }
            }
        } else {
            // Select the forwarding relay.
            let sel = match proto.kind {
                ProtocolKind::Oaf => {
                    let mut best = (0usize, f64::NEG_INFINITY, 0.0, 0.0);
                    for (j, st) in relays.iter().enumerate() {
                        let (b, ph, _) = gain_phase(
                            rng,
                            round,
                            LinkClass::RelayDest,
                            j as u32,
                            rho * model.beta_rd(j),
                        );
                        let stored = st.stored.as_ref().expect("qualified relay stores a vector");
                        let cascade_snr = {
                            // Cascade SNR the destination would see via j.
                            let g = stored.effective_snr();
                            crate::fading::af_two_hop_snr(g, b)
                        };
                        if cascade_snr > best.1 {
                            best = (j, cascade_snr, b, ph);
                        }
                    }
                    (best.0, best.2, best.3)
                }
                _ => {
                    let mut sel = usize::MAX;
                    let mut sel_b = f64::NEG_INFINITY;
                    let mut sel_ph = 0.0;
                    for (j, st) in relays.iter().enumerate() {
                        if !st.qualified {
                            continue;
                        }
                        let (b, ph, _) = gain_phase(
                            rng,
                            round,
                            LinkClass::RelayDest,
                            j as u32,
                            rho * model.beta_rd(j),
                        );
                        if b > sel_b {
                            sel = j;
                            sel_b = b;
                            sel_ph = ph;
                        }
                    }
                    (sel, sel_b, sel_ph)
                }
            };
            let (sel_idx, sel_gain, sel_phase) = sel;
            let stored = relays[sel_idx]
                .stored
                .as_ref()
                .expect("qualified relay stores a vector")
                .clone();
            let mut noise = {
                let mut s = rng.stream(round, LinkClass::RelayDest, sel_idx as u32);
                s.exp(1.0); // discard the gain position
                s.phase(); // discard the phase position
                s
            };
            dest_obs = af_relay_forward(&stored, sel_gain, sel_phase, &mut noise)?;
            transmitter = Transmitter::Relay(sel_idx);

            // Overhearing of the relayed transmission.
            if matches!(proto.kind, ProtocolKind::SoafB | ProtocolKind::SodfB) {
                let hop_new = relays[sel_idx].hop_count + 1;
                let gate_ok = proto.kind == ProtocolKind::SodfB
                    || (hop_new as usize) <= thresholds.len();
                if gate_ok {
                    for j in 0..relays.len() {
                        if relays[j].qualified {
                            continue;
                        }
                        let (c, ph, mut noise) = gain_phase(
                            rng,
                            round,
                            LinkClass::RelayRelay,
                            j as u32,
                            rho * model.beta_rr(sel_idx, j),
                        );
                        if proto.kind == ProtocolKind::SodfB {
                            let rx = af_relay_forward(&stored, c, ph, &mut noise)?;
                            if viterbi_mlsd(&rx, code, info_symbols)? == bits {
                                relays[j].qualified = true;
                                relays[j].hop_count = 1;
                                relays[j].stored = Some(clean.clone());
                                newly += 1;
                            }
                        } else if c > thresholds.deltas()[(hop_new - 1) as usize] {
                            let rx = af_relay_forward(&stored, c, ph, &mut noise)?;
                            relays[j].qualified = true;
                            relays[j].hop_count = hop_new;
                            relays[j].stored = Some(rx);
                            newly += 1;
                        }
                    }
                }
            }
        }

        let snr = dest_obs.effective_snr();
        received.push(dest_obs);
        let decoded = if proto.harq {
            let combined = mrc_combine(&received)?;
            viterbi_mlsd(&combined, code, info_symbols)?
        } else {
            viterbi_mlsd(received.last().expect("pushed above"), code, info_symbols)?
        };
        events.push(RoundEvent {
            round,
            transmitter,
            dest_snr: snr,
            newly_qualified: newly,
        });
        if decoded == bits {
            success_round = Some(round);
            break;
        }
    }

    Ok(match success_round {
        Some(r) => TrialOutcome {
            success: true,
            rounds_used: r,
            events,
        },
        None => TrialOutcome {
            success: false,
            rounds_used: params.n_max as u32,
            events,
        },
    })
}

/// PER after each round `n = 0..=N` with 3-sigma binomial half-widths;
/// deterministic for a fixed seed regardless of worker partitioning.
pub fn estimate_per_curve(
    proto: Protocol,
    code: &TrellisCode,
    info_symbols: usize,
    params: &SimParams,
    thresholds: &ThresholdVector,
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if trials < 1 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    // Validate configuration once up front.
    run_per_trial(proto, code, info_symbols, params, thresholds, &TrialRng::new(seed, 0))?;
    let n_max = params.n_max;
    let chunk = 1024u64;
    let n_chunks = trials.div_ceil(chunk);
    let fail_counts: Vec<u64> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = ((ci + 1) * chunk).min(trials);
            let mut counts = vec![0u64; n_max + 1];
            for t in lo..hi {
                let rng = TrialRng::new(seed, t);
                let out = run_per_trial(proto, code, info_symbols, params, thresholds, &rng)
                    .expect("validated configuration");
                let first_ok = if out.success {
                    out.rounds_used as usize
                } else {
                    usize::MAX
                };
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
