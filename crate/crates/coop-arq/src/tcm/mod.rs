//! Trellis-coded modulation and packet-level simulation: encoders and
//! constellations, distance spectra, vector amplify-and-forward with exact
//! noise bookkeeping, coherent sequence detection, combining, and the
//! packet-error trial engine.

pub mod code;
pub mod cplx;
pub mod per;
pub mod relay;
pub mod spectrum;
pub mod viterbi;

pub use code::{CodeRate, TrellisCode};
pub use cplx::Cplx;
pub use per::{estimate_per_curve, run_per_trial};
pub use relay::{af_relay_forward, mrc_combine, RelayedObservation};
pub use spectrum::{distance_spectrum, DistanceSpectrum, SpectrumLine};
pub use viterbi::viterbi_mlsd;
