//! Coherent maximum-likelihood sequence detection on the code trellis.

use crate::error::{Error, Result};
use crate::tcm::code::TrellisCode;
use crate::tcm::cplx::Cplx;
use crate::tcm::relay::RelayedObservation;

/// Decodes an observation of a terminated codeword and returns the
/// information bits.
///
/// Coherent detection: the destination knows the cascade gain, equalizes its
/// phase and minimizes the Euclidean metric against `|cascade| * symbol`
/// over all trellis paths that start and end in state zero.
pub fn viterbi_mlsd(
    obs: &RelayedObservation,
    code: &TrellisCode,
    info_symbols: usize,
) -> Result<Vec<bool>> {
    let total = info_symbols + code.tail_symbols;
    if obs.samples.len() != total {
        return Err(Error::Config(format!(
            "observation has {} samples, expected {total}",
            obs.samples.len()
        )));
    }
    let n_states = code.num_states;
    let n_in = code.num_inputs();
    let amp = obs.cascade.abs();
    let rot = if amp > 0.0 {
        obs.cascade.conj().scale(1.0 / amp)
    } else {
        Cplx::ONE
    };

    let mut metric = vec![f64::INFINITY; n_states];
    let mut next_metric = vec![f64::INFINITY; n_states];
    metric[0] = 0.0;
    // Survivor inputs per (step, state).
    let mut survivors = vec![0u8; total * n_states];

    for (k, &raw) in obs.samples.iter().enumerate() {
        let y = rot * raw;
        let tail_step = k >= info_symbols;
        next_metric.fill(f64::INFINITY);
        for state in 0..n_states {
            let base = metric[state];
            if !base.is_finite() {
                continue;
            }
            // Tail steps carry no payload: only the canonical flush input is
            // a codeword transition.
            let inputs: std::ops::Range<usize> = if tail_step { 0..1 } else { 0..n_in };
            for raw_input in inputs {
                let input = if tail_step {
                    code.tail_input(state)
                } else {
                    raw_input
                };
                let s = code.point(code.symbol_label(state, input)).scale(amp);
                let bm = (y - s).norm_sq();
                let ns = code.next_state(state, input);
                let cand = base + bm;
                if cand < next_metric[ns] {
                    next_metric[ns] = cand;
                    survivors[k * n_states + ns] = pack(state, input);
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    // Trace back from the zero state (terminated trellis).
    let mut state = 0usize;
    let mut inputs = vec![0usize; total];
    for k in (0..total).rev() {
        let (prev, input) = unpack(survivors[k * n_states + state]);
        inputs[k] = input;
        state = prev;
    }

    let bits_per = code.bits();
    let mut bits = Vec::with_capacity(info_symbols * bits_per);
    for &input in inputs.iter().take(info_symbols) {
        for i in 0..bits_per {
            bits.push((input >> i) & 1 == 1);
        }
    }
    Ok(bits)
}

#[inline]
fn pack(state: usize, input: usize) -> u8 {
    debug_assert!(state < 8 && input < 32);
    ((input as u8) << 3) | state as u8
}

#[inline]
fn unpack(v: u8) -> (usize, usize) {
    ((v & 0b111) as usize, (v >> 3) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SubRng;
    use crate::tcm::code::CodeRate;
    use crate::tcm::relay::af_relay_forward;

    fn random_bits(n: usize, rng: &mut SubRng) -> Vec<bool> {
        (0..n).map(|_| rng.bit()).collect()
    }

    #[test]
    fn noiseless_recovery_for_all_codes() {
        for rate in CodeRate::all() {
            let code = TrellisCode::for_rate(rate);
            let mut rng = SubRng::from_key(&[rate.bits() as u64, 17]);
            let info = 48usize;
            for _ in 0..200 {
                let bits = random_bits(info * code.bits(), &mut rng);
                let syms = code.encode(&bits, info).unwrap();
                let obs = RelayedObservation {
                    samples: syms.iter().map(|&s| s.scale(3.0)).collect(),
                    cascade: Cplx::new(3.0, 0.0),
                    noise_var: 1e-12,
                };
                let dec = viterbi_mlsd(&obs, &code, info).unwrap();
                assert_eq!(dec, bits, "{} noiseless decode failed", code.name);
            }
        }
    }

    #[test]
    fn global_phase_rotation_does_not_change_decisions() {
        let code = TrellisCode::for_rate(CodeRate::R2);
        let mut rng = SubRng::from_key(&[23]);
        let info = 32usize;
        for _ in 0..100 {
            let bits = random_bits(info * code.bits(), &mut rng);
            let syms = code.encode(&bits, info).unwrap();
            let src = RelayedObservation::source(syms);
            let mut obs = af_relay_forward(&src, 8.0, 0.0, &mut rng).unwrap();
            let d0 = viterbi_mlsd(&obs, &code, info).unwrap();
            // Rotate samples and cascade together.
            let rot = Cplx::from_polar(1.0, 2.4);
            obs.samples.iter_mut().for_each(|s| *s = rot * *s);
            obs.cascade = rot * obs.cascade;
            let d1 = viterbi_mlsd(&obs, &code, info).unwrap();
            assert_eq!(d0, d1);
        }
    }

    #[test]
    fn viterbi_equals_exhaustive_ml_on_small_packets() {
        // All codewords enumerated; 1000 noisy instances per code.
        for (rate, info) in [(CodeRate::R1, 6usize), (CodeRate::R2, 4usize)] {
            let code = TrellisCode::for_rate(rate);
            let nbits = info * code.bits();
            let codebook: Vec<(Vec<bool>, Vec<crate::tcm::cplx::Cplx>)> = (0..(1usize << nbits))
                .map(|w| {
                    let bits: Vec<bool> = (0..nbits).map(|i| (w >> i) & 1 == 1).collect();
                    let syms = code.encode(&bits, info).unwrap();
                    (bits, syms)
                })
                .collect();
            let mut rng = SubRng::from_key(&[rate.bits() as u64, 99]);
            for _ in 0..1000 {
                let idx = (rng.next_u64() % codebook.len() as u64) as usize;
                let src = RelayedObservation::source(codebook[idx].1.clone());
                let obs = af_relay_forward(&src, 2.0, rng.phase(), &mut rng).unwrap();
                let vit = viterbi_mlsd(&obs, &code, info).unwrap();

                // Exhaustive ML with the same coherent metric.
                let amp = obs.cascade.abs();
                let rot = obs.cascade.conj().scale(1.0 / amp);
                let best = codebook
                    .iter()
                    .map(|(bits, syms)| {
                        let m: f64 = obs
                            .samples
                            .iter()
                            .zip(syms)
                            .map(|(&y, &s)| (rot * y - s.scale(amp)).norm_sq())
                            .sum();
                        (m, bits)
                    })
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                    .unwrap();
                let vit_metric: f64 = {
                    let syms = code.encode(&vit, info).unwrap();
                    obs.samples
                        .iter()
                        .zip(&syms)
                        .map(|(&y, &s)| (rot * y - s.scale(amp)).norm_sq())
                        .sum()
                };
                assert!(
                    vit_metric <= best.0 + 1e-9,
                    "{}: viterbi metric {vit_metric} worse than exhaustive {}",
                    code.name,
                    best.0
                );
            }
        }
    }

    #[test]
    fn direct_link_per_sits_within_union_bound_factor() {
        // Fading direct link at 12 dB with the rate-1 code: the simulated PER
        // must lie within [0.2, 1.0] of the per-realization union bound
        // averaged over the same channel draws.
        let code = TrellisCode::for_rate(CodeRate::R1);
        let spectrum = crate::tcm::spectrum::distance_spectrum(&code, 10.0 * 2.2).unwrap();
        let rho = 10f64.powf(1.2);
        let info = 64usize;
        let trials = 20_000u64;
        let mut errors = 0u64;
        let mut bound_sum = 0.0;
        let mut rng = SubRng::from_key(&[120]);
        for _ in 0..trials {
            let w = rng.exp(rho);
            let bits = random_bits(info, &mut rng);
            let syms = code.encode(&bits, info).unwrap();
            let src = RelayedObservation::source(syms);
            let obs = af_relay_forward(&src, w, rng.phase(), &mut rng).unwrap();
            let dec = viterbi_mlsd(&obs, &code, info).unwrap();
            if dec != bits {
                errors += 1;
            }
            bound_sum += spectrum.union_bound_per(w, info);
        }
        let per = errors as f64 / trials as f64;
        let bound = bound_sum / trials as f64;
        let ratio = per / bound;
        assert!(
            (0.2..=1.0).contains(&ratio),
            "PER {per} vs union bound {bound}: ratio {ratio}"
        );
    }
}
