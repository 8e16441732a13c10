//! Amplify-and-forward of complex baseband vectors with exact cascade and
//! noise-variance bookkeeping, plus SNR-weighted maximal-ratio combining.

use crate::error::{Error, Result};
use crate::rng::SubRng;
use crate::tcm::cplx::Cplx;

/// A received codeword-bearing vector together with its effective channel.
///
/// `samples = cascade * x + noise`, where the per-sample noise variance is
/// `noise_var` (complex, circular). A transmitting node always normalizes by
/// its nominal received power `|cascade|^2 + noise_var`, so after at least
/// one hop `noise_var >= 1`: forwarding only ever adds noise.
#[derive(Debug, Clone)]
pub struct RelayedObservation {
    pub samples: Vec<Cplx>,
    pub cascade: Cplx,
    pub noise_var: f64,
}

impl RelayedObservation {
    /// A pristine transmit-side vector (no channel, no noise).
    pub fn source(samples: Vec<Cplx>) -> Self {
        RelayedObservation {
            samples,
            cascade: Cplx::ONE,
            noise_var: 0.0,
        }
    }

    /// Effective post-equalization SNR `|cascade|^2 / noise_var`.
    pub fn effective_snr(&self) -> f64 {
        if self.noise_var <= 0.0 {
            f64::INFINITY
        } else {
            self.cascade.norm_sq() / self.noise_var
        }
    }
}

/// Transmit `obs` over one hop with power gain `gain` (`rho |h|^2`) and the
/// channel phase `phase`, adding unit-variance complex noise per sample.
///
/// The transmitter first scales to unit nominal power, so the cascade gain
/// and noise variance of the output follow in closed form.
pub fn af_relay_forward(
    obs: &RelayedObservation,
    gain: f64,
    phase: f64,
    rng: &mut SubRng,
) -> Result<RelayedObservation> {
    if !(gain >= 0.0) {
        return Err(Error::Domain(format!("gain must be >= 0, got {gain}")));
    }
    let nominal = obs.cascade.norm_sq() + obs.noise_var;
    if !(nominal > 0.0) {
        return Err(Error::Domain("cannot forward an empty observation".into()));
    }
    let amp = (gain / nominal).sqrt();
    let h = Cplx::from_polar(amp, phase);
    let mut out = Vec::with_capacity(obs.samples.len());
    for &s in &obs.samples {
        let (nr, ni) = rng.normal_pair();
        // Unit-variance complex noise: each real dimension has variance 1/2.
        let noise = Cplx::new(nr * std::f64::consts::FRAC_1_SQRT_2, ni * std::f64::consts::FRAC_1_SQRT_2);
        out.push(h * s + noise);
    }
    Ok(RelayedObservation {
        samples: out,
        cascade: h * obs.cascade,
        noise_var: gain * obs.noise_var / nominal + 1.0,
    })
}

/// SNR-weighted maximal-ratio combining of observations of the same
/// codeword: per-sample weights `conj(cascade) / noise_var`, which makes the
/// combined effective SNR the exact sum of the branch SNRs.
pub fn mrc_combine(observations: &[RelayedObservation]) -> Result<RelayedObservation> {
    let first = observations
        .first()
        .ok_or_else(|| Error::Domain("MRC needs at least one observation".into()))?;
    let len = first.samples.len();
    let mut samples = vec![Cplx::ZERO; len];
    let mut gain = 0.0f64;
    for obs in observations {
        if obs.samples.len() != len {
            return Err(Error::Domain("MRC length mismatch".into()));
        }
        if !(obs.noise_var > 0.0) {
            return Err(Error::Domain("MRC needs noisy observations".into()));
        }
        let w = obs.cascade.conj().scale(1.0 / obs.noise_var);
        for (acc, &s) in samples.iter_mut().zip(&obs.samples) {
            *acc += w * s;
        }
        gain += obs.cascade.norm_sq() / obs.noise_var;
    }
    Ok(RelayedObservation {
        samples,
        cascade: Cplx::new(gain, 0.0),
        noise_var: gain,
    })
}
