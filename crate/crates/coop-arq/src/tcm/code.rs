//! Trellis-coded modulation: encoders, constellations, set partitioning.
//!
//! Five codes cover spectral efficiencies of 1 through 5 bits per channel
//! use. The rate-1 code is the classic 4-state convolutional code with
//! generators `[5o, 7o]` Gray-mapped onto QPSK. The rate-2 code is the
//! 4-state 8PSK scheme with parity-check taps `(5o, 2o)` and one uncoded
//! bit. Rates 3 to 5 share an 8-state systematic-feedback encoder with
//! parity-check taps `(11o, 2o, 4o)` driving set-partitioned 16QAM, 32-cross
//! and 64QAM; the remaining input bits ride on parallel transitions. All
//! constellations are normalized to unit average symbol energy, and every
//! packet is driven back to the zero state by two tail symbols.

use crate::error::{Error, Result};
use crate::tcm::cplx::Cplx;

/// Rate tag for the five supported codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeRate {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl CodeRate {
    pub fn all() -> [CodeRate; 5] {
        [CodeRate::R1, CodeRate::R2, CodeRate::R3, CodeRate::R4, CodeRate::R5]
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CodeRate::R1 => "rate-1",
            CodeRate::R2 => "rate-2",
            CodeRate::R3 => "rate-3",
            CodeRate::R4 => "rate-4",
            CodeRate::R5 => "rate-5",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "rate-1" | "1" => Ok(CodeRate::R1),
            "rate-2" | "2" => Ok(CodeRate::R2),
            "rate-3" | "3" => Ok(CodeRate::R3),
            "rate-4" | "4" => Ok(CodeRate::R4),
            "rate-5" | "5" => Ok(CodeRate::R5),
            other => Err(Error::Config(format!("unknown code rate tag '{other}'"))),
        }
    }

    /// Information bits per channel use.
    pub fn bits(&self) -> usize {
        match self {
            CodeRate::R1 => 1,
            CodeRate::R2 => 2,
            CodeRate::R3 => 3,
            CodeRate::R4 => 4,
            CodeRate::R5 => 5,
        }
    }
}

/// A trellis code ready for encoding, decoding and spectrum search.
#[derive(Debug, Clone)]
pub struct TrellisCode {
    pub name: &'static str,
    pub rate: CodeRate,
    pub num_states: usize,
    /// Generator / parity-check polynomials, octal, for documentation.
    pub generator_octal: Vec<u32>,
    /// Unit-average-energy constellation points indexed by symbol label.
    pub constellation: Vec<Cplx>,
    /// `next_state[state * 2^R + input]`.
    next_state: Vec<u16>,
    /// `symbol[state * 2^R + input]` (label into the constellation).
    symbol: Vec<u16>,
    /// Tail symbols appended to flush the trellis to state zero.
    pub tail_symbols: usize,
}

impl TrellisCode {
    /// Bits per symbol.
    pub fn bits(&self) -> usize {
        self.rate.bits()
    }

    pub fn num_inputs(&self) -> usize {
        1 << self.bits()
    }

    #[inline]
    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.next_state[state * self.num_inputs() + input] as usize
    }

    #[inline]
    pub fn symbol_label(&self, state: usize, input: usize) -> usize {
        self.symbol[state * self.num_inputs() + input] as usize
    }

    #[inline]
    pub fn point(&self, label: usize) -> Cplx {
        self.constellation[label]
    }

    /// The canonical tail input out of `state`: the input reaching the
    /// lowest next state, which flushes these encoders to zero within
    /// `tail_symbols` steps. The decoder restricts tail transitions to the
    /// same choice so its path set is exactly the codebook.
    pub fn tail_input(&self, state: usize) -> usize {
        let (mut best_in, mut best_next) = (0usize, usize::MAX);
        for input in 0..self.num_inputs() {
            let ns = self.next_state(state, input);
            if ns < best_next {
                best_next = ns;
                best_in = input;
            }
        }
        best_in
    }

    /// The tail inputs that drive `state` to zero in `tail_symbols` steps.
    pub fn tail_inputs(&self, state: usize) -> Vec<usize> {
        let mut s = state;
        let mut tail = Vec::with_capacity(self.tail_symbols);
        for _ in 0..self.tail_symbols {
            let input = self.tail_input(s);
            tail.push(input);
            s = self.next_state(s, input);
        }
        debug_assert_eq!(s, 0, "tail did not terminate the trellis");
        tail
    }

    /// Encode `bits` (length `R * info_symbols`) into
    /// `info_symbols + tail_symbols` unit-energy symbols.
    pub fn encode(&self, bits: &[bool], info_symbols: usize) -> Result<Vec<Cplx>> {
        if bits.len() != self.bits() * info_symbols {
            return Err(Error::Config(format!(
                "{} expects {} bits for {} info symbols, got {}",
                self.name,
                self.bits() * info_symbols,
                info_symbols,
                bits.len()
            )));
        }
        let mut out = Vec::with_capacity(info_symbols + self.tail_symbols);
        let mut state = 0usize;
        for chunk in bits.chunks(self.bits()) {
            let mut input = 0usize;
            for (i, &b) in chunk.iter().enumerate() {
                input |= (b as usize) << i;
            }
            out.push(self.point(self.symbol_label(state, input)));
            state = self.next_state(state, input);
        }
        for input in self.tail_inputs(state) {
            out.push(self.point(self.symbol_label(state, input)));
            state = self.next_state(state, input);
        }
        debug_assert_eq!(state, 0);
        Ok(out)
    }

    /// Build the code for a rate tag.
    pub fn for_rate(rate: CodeRate) -> Self {
        match rate {
            CodeRate::R1 => build_rate1(),
            CodeRate::R2 => build_rate2(),
            CodeRate::R3 => build_qam(CodeRate::R3),
            CodeRate::R4 => build_qam(CodeRate::R4),
            CodeRate::R5 => build_qam(CodeRate::R5),
        }
    }
}

/// Gray-mapped unit-energy QPSK: two independent binary rails, so squared
/// distance is 2 per differing bit.
fn qpsk_gray() -> Vec<Cplx> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // label = (y1 << 1) | y2; Gray on the quadrants.
    vec![
        Cplx::new(s, s),    // 00
        Cplx::new(s, -s),   // 01
        Cplx::new(-s, s),   // 10
        Cplx::new(-s, -s),  // 11
    ]
}

fn build_rate1() -> TrellisCode {
    let n_in = 2usize;
    let states = 4usize;
    let mut next = vec![0u16; states * n_in];
    let mut symb = vec![0u16; states * n_in];
    for state in 0..states {
        let s1 = (state >> 1) & 1; // previous bit
        let s2 = state & 1; // bit before that
        for input in 0..n_in {
            let u = input & 1;
            let y1 = u ^ s2; // 5o = 101
            let y2 = u ^ s1 ^ s2; // 7o = 111
            next[state * n_in + input] = ((u << 1) | s1) as u16;
            symb[state * n_in + input] = ((y1 << 1) | y2) as u16;
        }
    }
    TrellisCode {
        name: "rate-1 4-state QPSK",
        rate: CodeRate::R1,
        num_states: states,
        generator_octal: vec![0o5, 0o7],
        constellation: qpsk_gray(),
        next_state: next,
        symbol: symb,
        tail_symbols: 2,
    }
}

/// Natural-mapped unit-energy 8PSK.
fn psk8() -> Vec<Cplx> {
    (0..8)
        .map(|k| Cplx::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 8.0))
        .collect()
}

fn build_rate2() -> TrellisCode {
    // Systematic feedback parity with taps (5o, 2o): y0_k = y0_{k-2} ^ x1_{k-1}.
    // State (u, v): y0 = v, next = (v, u ^ x1). Input bit x2 is uncoded and
    // selects within the antipodal pair (parallel transition).
    let n_in = 4usize;
    let states = 4usize;
    let mut next = vec![0u16; states * n_in];
    let mut symb = vec![0u16; states * n_in];
    for state in 0..states {
        let u = (state >> 1) & 1;
        let v = state & 1;
        for input in 0..n_in {
            let x1 = input & 1;
            let x2 = (input >> 1) & 1;
            let y0 = v;
            next[state * n_in + input] = ((v << 1) | (u ^ x1)) as u16;
            symb[state * n_in + input] = ((x2 << 2) | (x1 << 1) | y0) as u16;
        }
    }
    TrellisCode {
        name: "rate-2 4-state 8PSK",
        rate: CodeRate::R2,
        num_states: states,
        generator_octal: vec![0o5, 0o2],
        constellation: psk8(),
        next_state: next,
        symbol: symb,
        tail_symbols: 2,
    }
}

/// Integer grid points of the QAM constellations (odd coordinates).
fn qam_grid(rate: CodeRate) -> Vec<(i32, i32)> {
    let mut pts = Vec::new();
    match rate {
        CodeRate::R3 => {
            for i in [-3i32, -1, 1, 3] {
                for q in [-3i32, -1, 1, 3] {
                    pts.push((i, q));
                }
            }
        }
        CodeRate::R4 => {
            // 32-cross: the 6x6 odd grid minus its four corners.
            for i in [-5i32, -3, -1, 1, 3, 5] {
                for q in [-5i32, -3, -1, 1, 3, 5] {
                    if i.abs() == 5 && q.abs() == 5 {
                        continue;
                    }
                    pts.push((i, q));
                }
            }
        }
        CodeRate::R5 => {
            for i in [-7i32, -5, -3, -1, 1, 3, 5, 7] {
                for q in [-7i32, -5, -3, -1, 1, 3, 5, 7] {
                    pts.push((i, q));
                }
            }
        }
        _ => unreachable!("qam_grid is for rates 3..5"),
    }
    pts
}

/// Three-level set-partition label of a constellation point with odd
/// coordinates: each level doubles the minimum squared distance of the
/// surviving subset.
fn partition_label(i: i32, q: i32) -> (usize, usize, usize) {
    // Unit-spaced grid indices: neighbors at coordinate distance 2 differ
    // by one index step.
    let ii = (i + 1).div_euclid(2);
    let qq = (q + 1).div_euclid(2);
    let l0 = ((ii + qq).rem_euclid(2)) as usize;
    let l1 = (ii.rem_euclid(2)) as usize;
    // Collapse to the even sublattice before the third split.
    let i2 = (ii - ii.rem_euclid(2)) / 2;
    let q2 = (qq - qq.rem_euclid(2)) / 2;
    let l2 = ((i2 + q2).rem_euclid(2)) as usize;
    (l0, l1, l2)
}

fn build_qam(rate: CodeRate) -> TrellisCode {
    let r = rate.bits();
    let n_in = 1usize << r;
    let states = 8usize;
    let grid = qam_grid(rate);
    let energy: f64 = grid
        .iter()
        .map(|&(i, q)| (i * i + q * q) as f64)
        .sum::<f64>()
        / grid.len() as f64;
    let scale = 1.0 / energy.sqrt();

    // Group points by partition label; uncoded bits index within a subset.
    let subset_size = grid.len() / 8;
    let mut subsets: Vec<Vec<(i32, i32)>> = vec![Vec::new(); 8];
    let mut sorted = grid.clone();
    sorted.sort();
    for (i, q) in sorted {
        let (l0, l1, l2) = partition_label(i, q);
        subsets[(l2 << 2) | (l1 << 1) | l0].push((i, q));
    }
    for s in &subsets {
        assert_eq!(s.len(), subset_size, "unbalanced set partition");
    }
    let mut constellation = vec![Cplx::ZERO; grid.len()];
    for (sub, pts) in subsets.iter().enumerate() {
        for (u, &(i, q)) in pts.iter().enumerate() {
            let label = (u << 3) | sub;
            constellation[label] = Cplx::new(i as f64 * scale, q as f64 * scale);
        }
    }

    // 8-state systematic feedback encoder, parity taps (11o, 2o, 4o):
    // y0_k = y0_{k-3} ^ x1_{k-1} ^ x2_{k-2}, in transposed form II.
    let mut next = vec![0u16; states * n_in];
    let mut symb = vec![0u16; states * n_in];
    for state in 0..states {
        let z1 = (state >> 2) & 1;
        let z2 = (state >> 1) & 1;
        let z3 = state & 1;
        for input in 0..n_in {
            let x1 = input & 1;
            let x2 = (input >> 1) & 1;
            let uncoded = input >> 2;
            let y0 = z1;
            let nz1 = z2 ^ x1;
            let nz2 = z3 ^ x2;
            let nz3 = z1;
            next[state * n_in + input] = ((nz1 << 2) | (nz2 << 1) | nz3) as u16;
            symb[state * n_in + input] = ((uncoded << 3) | (x2 << 2) | (x1 << 1) | y0) as u16;
        }
    }
    let (name, gens) = match rate {
        CodeRate::R3 => ("rate-3 8-state 16QAM", vec![0o11, 0o2, 0o4]),
        CodeRate::R4 => ("rate-4 8-state 32-cross", vec![0o11, 0o2, 0o4]),
        CodeRate::R5 => ("rate-5 8-state 64QAM", vec![0o11, 0o2, 0o4]),
        _ => unreachable!(),
    };
    TrellisCode {
        name,
        rate,
        num_states: states,
        generator_octal: gens,
        constellation,
        next_state: next,
        symbol: symb,
        tail_symbols: 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SubRng;

    #[test]
    fn constellations_have_unit_average_energy() {
        for rate in CodeRate::all() {
            let code = TrellisCode::for_rate(rate);
            let e: f64 = code.constellation.iter().map(|p| p.norm_sq()).sum::<f64>()
                / code.constellation.len() as f64;
            assert!(
                (e - 1.0).abs() < 1e-12,
                "{}: average energy {e}",
                code.name
            );
        }
    }

    #[test]
    fn all_zero_input_stays_on_the_zero_path() {
        let code = TrellisCode::for_rate(CodeRate::R1);
        let bits = vec![false; 16];
        let syms = code.encode(&bits, 16).unwrap();
        let zero_sym = code.point(code.symbol_label(0, 0));
        for s in syms {
            assert_eq!(s, zero_sym);
        }
    }

    #[test]
    fn encode_length_and_termination() {
        for rate in CodeRate::all() {
            let code = TrellisCode::for_rate(rate);
            let info = 20usize;
            let mut rng = SubRng::from_key(&[rate.bits() as u64]);
            let bits: Vec<bool> = (0..info * code.bits()).map(|_| rng.bit()).collect();
            let syms = code.encode(&bits, info).unwrap();
            assert_eq!(syms.len(), info + code.tail_symbols);
            // Termination reachable from every state.
            for s in 0..code.num_states {
                let mut st = s;
                for input in code.tail_inputs(s) {
                    st = code.next_state(st, input);
                }
                assert_eq!(st, 0, "state {s} does not terminate");
            }
        }
        let code = TrellisCode::for_rate(CodeRate::R1);
        assert!(code.encode(&[true; 5], 16).is_err());
    }

    #[test]
    fn per_packet_average_energy_near_one() {
        // Energy oracle by direct summation over random packets.
        let code = TrellisCode::for_rate(CodeRate::R1);
        let mut rng = SubRng::from_key(&[55]);
        let info = 128usize;
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..info).map(|_| rng.bit()).collect();
            let syms = code.encode(&bits, info).unwrap();
            let e: f64 = syms.iter().map(|p| p.norm_sq()).sum::<f64>() / syms.len() as f64;
            assert!((e - 1.0).abs() <= 0.1, "packet energy {e}");
        }
    }

    #[test]
    fn hard_demodulation_roundtrips_at_infinite_snr() {
        // Nearest-point demodulation of the clean waveform recovers the
        // transmitted labels.
        for rate in CodeRate::all() {
            let code = TrellisCode::for_rate(rate);
            let mut rng = SubRng::from_key(&[9, rate.bits() as u64]);
            let info = 40usize;
            let bits: Vec<bool> = (0..info * code.bits()).map(|_| rng.bit()).collect();
            let syms = code.encode(&bits, info).unwrap();
            for s in &syms {
                let nearest = code
                    .constellation
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        (**a - *s).norm_sq().partial_cmp(&(**b - *s).norm_sq()).unwrap()
                    })
                    .unwrap();
                assert!((*nearest.1 - *s).norm_sq() < 1e-20);
            }
        }
    }
}
