//! Distance-spectrum computation on the pair trellis.
//!
//! Enumerates error events (pairs of paths that diverge from a common state
//! and remerge) up to a squared-distance cap, averaging multiplicities over
//! the transmitted sequence: each event is weighted by the stationary state
//! probability and the probability of its correct-path input choices. The
//! result is the per-information-symbol multiplicity convention; multiply by
//! the packet length for per-packet event counts.

use crate::error::{Error, Result};
use crate::tcm::code::TrellisCode;

/// One spectrum line: squared Euclidean distance and its average
/// multiplicity per information symbol.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumLine {
    pub d_sq: f64,
    pub omega: f64,
}

/// Distance spectrum of a trellis code up to a squared-distance cap.
#[derive(Debug, Clone)]
pub struct DistanceSpectrum {
    /// Lines sorted by ascending squared distance.
    pub lines: Vec<SpectrumLine>,
    pub d_cap_sq: f64,
}

impl DistanceSpectrum {
    /// Squared minimum distance.
    pub fn d_min_sq(&self) -> f64 {
        self.lines.first().map(|l| l.d_sq).unwrap_or(f64::INFINITY)
    }

    /// Largest tracked squared distance.
    pub fn d_max_sq(&self) -> f64 {
        self.lines.last().map(|l| l.d_sq).unwrap_or(0.0)
    }

    /// Multiplicity of the minimum distance (per information symbol).
    pub fn omega_min(&self) -> f64 {
        self.lines.first().map(|l| l.omega).unwrap_or(0.0)
    }

    /// Union-bound packet error estimate at effective SNR `gamma` for
    /// `info_symbols` information symbols, capped at 1.
    pub fn union_bound_per(&self, gamma: f64, info_symbols: usize) -> f64 {
        let sum: f64 = self
            .lines
            .iter()
            .map(|l| l.omega * crate::special::q_func((gamma * l.d_sq / 2.0).sqrt()))
            .sum();
        (sum * info_symbols as f64).min(1.0)
    }
}

/// Computes all error-event distances below `d_cap_sq` with averaged
/// multiplicities.
///
/// Dynamic programming over the pair trellis: live mass is a map from
/// (correct state, error state, accumulated-distance bucket) to weight, so
/// the cost stays polynomial even for long low-distance events. Distances
/// are bucketed at 1e-7 absolute resolution, far below the spacing of any
/// of the constellations involved.
pub fn distance_spectrum(code: &TrellisCode, d_cap_sq: f64) -> Result<DistanceSpectrum> {
    if !(d_cap_sq > 0.0) {
        return Err(Error::Domain("distance cap must be positive".into()));
    }
    let n_in = code.num_inputs();
    let n_states = code.num_states;
    let input_prob = 1.0 / n_in as f64;
    let state_prob = 1.0 / n_states as f64;
    let max_len = 64 * n_states;

    const QUANTUM: f64 = 1e-7;
    let bucket = |d: f64| -> i64 { (d / QUANTUM).round() as i64 };

    // Precompute per-(sc, se) transition increments: (next pair, d_inc,
    // number of correct choices folded into the weight).
    type Live = std::collections::HashMap<(u16, u16, i64), f64>;
    let mut live: Live = std::collections::HashMap::new();
    let mut acc: std::collections::HashMap<i64, f64> = std::collections::HashMap::new();

    // Divergence step: same start state, different inputs.
    for s in 0..n_states {
        for uc in 0..n_in {
            let pc = code.point(code.symbol_label(s, uc));
            let nc = code.next_state(s, uc);
            for ue in 0..n_in {
                if ue == uc {
                    continue;
                }
                let pe = code.point(code.symbol_label(s, ue));
                let d = (pc - pe).norm_sq();
                if d > d_cap_sq {
                    continue;
                }
                let ne = code.next_state(s, ue);
                let w = state_prob * input_prob;
                if nc == ne {
                    *acc.entry(bucket(d)).or_insert(0.0) += w;
                } else {
                    *live.entry((nc as u16, ne as u16, bucket(d))).or_insert(0.0) += w;
                }
            }
        }
    }

    let mut steps = 0usize;
    while !live.is_empty() {
        steps += 1;
        if steps > max_len {
            return Err(Error::Numerical(format!(
                "distance spectrum search exceeded {max_len} steps below cap {d_cap_sq}"
            )));
        }
        let mut next: Live = std::collections::HashMap::new();
        for (&(sc, se, db), &w) in &live {
            // Mass decays by the input probability every step; entries below
            // this floor cannot move any reported multiplicity.
            if w < 1e-18 {
                continue;
            }
            let d0 = db as f64 * QUANTUM;
            for uc in 0..n_in {
                let pc = code.point(code.symbol_label(sc as usize, uc));
                let nc = code.next_state(sc as usize, uc);
                let w_step = w * input_prob;
                for ue in 0..n_in {
                    let pe = code.point(code.symbol_label(se as usize, ue));
                    let d = d0 + (pc - pe).norm_sq();
                    if d > d_cap_sq {
                        continue;
                    }
                    let ne = code.next_state(se as usize, ue);
                    if nc == ne {
                        *acc.entry(bucket(d)).or_insert(0.0) += w_step;
                    } else {
                        *next
                            .entry((nc as u16, ne as u16, bucket(d)))
                            .or_insert(0.0) += w_step;
                    }
                }
            }
        }
        live = next;
    }

    let mut raw: Vec<(f64, f64)> = acc
        .into_iter()
        .map(|(b, w)| (b as f64 * QUANTUM, w))
        .collect();
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Merge buckets that are numerically the same distance.
    let mut lines: Vec<SpectrumLine> = Vec::new();
    for (d, w) in raw {
        match lines.last_mut() {
            Some(last) if (d - last.d_sq).abs() <= 1e-6 * d.max(1.0) => last.omega += w,
            _ => lines.push(SpectrumLine { d_sq: d, omega: w }),
        }
    }
    Ok(DistanceSpectrum { lines, d_cap_sq })
}
