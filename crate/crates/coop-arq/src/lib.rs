//! A link-level laboratory for cooperative ARQ with selective and
//! opportunistic amplify-and-forward relaying.
//!
//! The crate has two independent evaluation routes for every protocol:
//!
//! * **Analytic** ([`outage`]): closed-form outage probabilities and lower
//!   bounds for single-relay selective AF, opportunistic AF, and both
//!   selective-opportunistic variants, built on a generalized incomplete
//!   gamma function ([`special`]).
//! * **Monte-Carlo** ([`protocol`] at outage level, [`tcm`] at packet level
//!   with trellis-coded modulation and coherent sequence detection).
//!
//! [`threshold`] assigns the per-hop link-quality thresholds that let the
//! overhearing protocol keep its diversity order, either by a log-scale rule
//! or by a per-SNR bisection search. [`experiments`] wires everything into
//! reproducible scenario CSV runs; the `coop-arq` binary exposes them on the
//! command line.
//!
//! Start with the `examples/` directory: each example exercises one major
//! capability end to end.

pub mod error;
pub mod experiments;
pub mod fading;
pub mod outage;
pub mod protocol;
pub mod rng;
pub mod special;
pub mod tcm;
pub mod threshold;

pub use error::{Error, Result};
