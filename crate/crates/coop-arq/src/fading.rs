//! Geometry-derived link statistics and block-Rayleigh channel draws.
//!
//! A topology places the source at the origin, the destination at unit
//! distance, and relays inside a small disk. Average channel powers follow a
//! path-loss law on the node distances. At outage level the composite gains
//! `rho |h|^2` are drawn directly as exponentials; complex coefficients with
//! phase exist only in the packet-level simulation ([`crate::tcm`]).

use crate::error::{Error, Result};
use crate::rng::{LinkClass, SubRng, TrialRng};

/// Relay-deployment geometry: relays uniform in a disk of radius `s0`
/// centered at `(s1, s2)`; source at `(0, 0)`, destination at `(1, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    /// Disk radius (in normalized source-destination distance units).
    pub s0: f64,
    /// Disk center x.
    pub s1: f64,
    /// Disk center y.
    pub s2: f64,
    /// Path-loss exponent.
    pub eta: f64,
}

impl Geometry {
    pub fn new(s0: f64, s1: f64, s2: f64, eta: f64) -> Result<Self> {
        if !(s0 >= 0.0) {
            return Err(Error::Domain(format!("disk radius must be >= 0, got {s0}")));
        }
        if !(eta > 0.0) {
            return Err(Error::Domain(format!(
                "path-loss exponent must be > 0, got {eta}"
            )));
        }
        Ok(Geometry { s0, s1, s2, eta })
    }
}

/// Worst-case average channel powers per link class.
#[derive(Debug, Clone, Copy)]
pub struct LinkVariances {
    /// Source-destination variance (normalized to 1).
    pub beta0: f64,
    /// Worst source-relay variance.
    pub beta1: f64,
    /// Worst relay-destination variance.
    pub beta2: f64,
    /// Worst relay-relay variance.
    pub beta3: f64,
}

impl LinkVariances {
    pub fn new(beta0: f64, beta1: f64, beta2: f64, beta3: f64) -> Result<Self> {
        for (name, b) in [
            ("beta0", beta0),
            ("beta1", beta1),
            ("beta2", beta2),
            ("beta3", beta3),
        ] {
            if !(b > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {b}")));
            }
        }
        Ok(LinkVariances {
            beta0,
            beta1,
            beta2,
            beta3,
        })
    }

    /// All link classes at unit variance.
    pub fn unit() -> Self {
        LinkVariances {
            beta0: 1.0,
            beta1: 1.0,
            beta2: 1.0,
            beta3: 1.0,
        }
    }
}

/// Worst-case link variances from the deployment geometry.
///
/// The source-destination distance is normalized to one, so `beta0 = 1`.
/// Source-relay and relay-destination use the farthest point of the disk;
/// relay-relay uses the disk diameter.
pub fn variances_from_geometry(geom: &Geometry) -> Result<LinkVariances> {
    let d_sr = (geom.s1 * geom.s1 + geom.s2 * geom.s2).sqrt() + geom.s0;
    let d_rd = ((1.0 - geom.s1) * (1.0 - geom.s1) + geom.s2 * geom.s2).sqrt() + geom.s0;
    let d_rr = 2.0 * geom.s0;
    if d_sr <= 0.0 || d_rd <= 0.0 {
        return Err(Error::Domain(
            "degenerate geometry: a worst-case distance is zero".into(),
        ));
    }
    if d_rr <= 0.0 {
        return Err(Error::Domain(
            "s0 = 0 makes the worst-case relay-relay distance zero".into(),
        ));
    }
    LinkVariances::new(
        1.0,
        d_sr.powf(-geom.eta),
        d_rd.powf(-geom.eta),
        d_rr.powf(-geom.eta),
    )
}

/// Draw `m` relay positions uniformly in the deployment disk.
pub fn place_relays(geom: &Geometry, m: usize, rng: &mut SubRng) -> Vec<(f64, f64)> {
    (0..m)
        .map(|_| {
            let r = geom.s0 * rng.uniform().sqrt();
            let th = rng.phase();
            (geom.s1 + r * th.cos(), geom.s2 + r * th.sin())
        })
        .collect()
}

/// Average channel powers for every individual link.
///
/// Either the simplified worst-case model (one variance per link class) or
/// exact per-pair variances computed from relay positions.
#[derive(Debug, Clone)]
pub enum ChannelModel {
    /// Identical variance per link class (analysis model).
    WorstCase(LinkVariances),
    /// Per-link variances from an actual placement.
    Exact {
        beta0: f64,
        /// Source to relay j.
        sr: Vec<f64>,
        /// Relay j to destination.
        rd: Vec<f64>,
        /// Relay i to relay j (diagonal unused).
        rr: Vec<Vec<f64>>,
    },
}

impl ChannelModel {
    /// Exact per-pair variances for a relay placement under `geom`'s
    /// path-loss exponent.
    pub fn from_positions(geom: &Geometry, positions: &[(f64, f64)]) -> Result<Self> {
        let eta = geom.eta;
        let dist = |a: (f64, f64), b: (f64, f64)| -> f64 {
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        };
        let src = (0.0, 0.0);
        let dst = (1.0, 0.0);
        let m = positions.len();
        let mut sr = Vec::with_capacity(m);
        let mut rd = Vec::with_capacity(m);
        for &p in positions {
            let dsr = dist(src, p);
            let drd = dist(dst, p);
            if dsr <= 0.0 || drd <= 0.0 {
                return Err(Error::Domain("relay coincides with source or destination".into()));
            }
            sr.push(dsr.powf(-eta));
            rd.push(drd.powf(-eta));
        }
        let mut rr = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let d = dist(positions[i], positions[j]);
                    // Coincident relays get a very short but nonzero distance
                    // so the variance stays finite.
                    rr[i][j] = d.max(1e-9).powf(-eta);
                }
            }
        }
        Ok(ChannelModel::Exact {
            beta0: 1.0,
            sr,
            rd,
            rr,
        })
    }

    pub fn beta0(&self) -> f64 {
        match self {
            ChannelModel::WorstCase(v) => v.beta0,
            ChannelModel::Exact { beta0, .. } => *beta0,
        }
    }

    pub fn beta_sr(&self, j: usize) -> f64 {
        match self {
            ChannelModel::WorstCase(v) => v.beta1,
            ChannelModel::Exact { sr, .. } => sr[j],
        }
    }

    pub fn beta_rd(&self, j: usize) -> f64 {
        match self {
            ChannelModel::WorstCase(v) => v.beta2,
            ChannelModel::Exact { rd, .. } => rd[j],
        }
    }

    pub fn beta_rr(&self, i: usize, j: usize) -> f64 {
        match self {
            ChannelModel::WorstCase(v) => v.beta3,
            ChannelModel::Exact { rr, .. } => rr[i][j],
        }
    }
}

/// One round's worth of composite link gains (linear SNR).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Source-destination gain `rho |h_sd|^2`.
    pub w: f64,
    /// Source-relay gains.
    pub a: Vec<f64>,
    /// Relay-destination gains.
    pub b: Vec<f64>,
    /// Relay-relay gains; `c[i][j]` is transmitter i to receiver j, diagonal
    /// entries are unused and left at zero.
    pub c: Vec<Vec<f64>>,
}

/// Draw a full channel realization for one ARQ round.
///
/// Gains are exponential with mean `rho * beta` of their link class, drawn
/// from named substreams so the same `(seed, trial, round)` always yields the
/// same realization.
pub fn draw_round(
    model: &ChannelModel,
    rho: f64,
    m: usize,
    round: u32,
    rng: &TrialRng,
) -> Result<ChannelRealization> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho must be > 0, got {rho}")));
    }
    let w = rng
        .stream(round, LinkClass::SourceDest, 0)
        .exp(rho * model.beta0());
    let a: Vec<f64> = (0..m)
        .map(|j| {
            rng.stream(round, LinkClass::SourceRelay, j as u32)
                .exp(rho * model.beta_sr(j))
        })
        .collect();
    let b: Vec<f64> = (0..m)
        .map(|j| {
            rng.stream(round, LinkClass::RelayDest, j as u32)
                .exp(rho * model.beta_rd(j))
        })
        .collect();
    // One receiver-side substream per (round, j); the mean depends on the
    // transmitting relay. Only one relay transmits per round, so a single
    // substream per receiver is enough for reproducibility.
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let u = rng.stream(round, LinkClass::RelayRelay, j as u32).uniform();
                c[i][j] = -(rho * model.beta_rr(i, j)) * libm::log1p(-u);
            }
        }
    }
    Ok(ChannelRealization { w, a, b, c })
}

/// Effective SNR of a two-hop amplify-and-forward link: `a*b / (a + b + 1)`.
#[inline]
pub fn af_two_hop_snr(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    a * b / (a + b + 1.0)
}

/// Effective SNR of a multi-hop amplify-and-forward chain followed by the
/// destination hop `b`:
/// `[ (1 + 1/a1) * prod_i (1 + 1/c_i) * (1 + 1/b) - 1 ]^(-1)`.
///
/// A zero gain anywhere yields SNR 0 (a dead hop kills the chain). For a
/// one-element chain this reduces exactly to [`af_two_hop_snr`].
pub fn af_multi_hop_snr(chain: &[f64], b: f64) -> f64 {
    if b <= 0.0 || chain.iter().any(|&g| g <= 0.0) {
        return 0.0;
    }
    let mut prod = 1.0 + 1.0 / b;
    for &g in chain {
        prod *= 1.0 + 1.0 / g;
    }
    1.0 / (prod - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom_example() -> Geometry {
        Geometry::new(0.05, 0.5, 0.0, 3.0).unwrap()
    }

    #[test]
    fn variances_from_example_geometry() {
        let v = variances_from_geometry(&geom_example()).unwrap();
        assert_eq!(v.beta0, 1.0);
        // (0.5 + 0.05)^-3 = 0.55^-3
        let want = 0.55f64.powi(-3);
        assert!((v.beta1 - want).abs() < 1e-12);
        assert!((v.beta2 - want).abs() < 1e-12);
        // (2*0.05)^-3 = 1000
        assert!((v.beta3 - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn zero_radius_is_a_domain_error_for_rr() {
        let g = Geometry::new(0.0, 0.5, 0.0, 3.0).unwrap();
        assert!(variances_from_geometry(&g).is_err());
    }

    #[test]
    fn two_hop_examples() {
        assert!((af_two_hop_snr(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(af_two_hop_snr(0.0, 5.0), 0.0);
        assert!((af_two_hop_snr(3.0, 6.0) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn multi_hop_examples() {
        assert!((af_multi_hop_snr(&[1.0], 1.0) - 1.0 / 3.0).abs() < 1e-15);
        // chain [2,2], b=2 -> (1.5^3 - 1)^-1
        let want = 1.0 / (1.5f64.powi(3) - 1.0);
        assert!((af_multi_hop_snr(&[2.0, 2.0], 2.0) - want).abs() < 1e-15);
        assert_eq!(af_multi_hop_snr(&[1.0, 0.0], 1.0), 0.0);
    }

    #[test]
    fn draw_round_is_deterministic_and_nonnegative() {
        let model = ChannelModel::WorstCase(LinkVariances::unit());
        let rng = TrialRng::new(11, 3);
        let r1 = draw_round(&model, 10.0, 3, 2, &rng).unwrap();
        let r2 = draw_round(&model, 10.0, 3, 2, &rng).unwrap();
        assert_eq!(r1.w, r2.w);
        assert_eq!(r1.a, r2.a);
        assert_eq!(r1.b, r2.b);
        assert_eq!(r1.c, r2.c);
        assert!(r1.w >= 0.0);
        assert!(r1.a.iter().chain(&r1.b).all(|&g| g >= 0.0));
        assert!(draw_round(&model, 0.0, 3, 0, &rng).is_err());
    }

    #[test]
    fn sampler_mean_matches_lln_oracle() {
        // a ~ Exp(rho*beta1) with rho=100, beta1=1: sample mean of 10^6 draws
        // within 3*(100/sqrt(10^6)) of 100.
        let model = ChannelModel::WorstCase(LinkVariances::unit());
        let n = 1_000_000u64;
        let mut sum = 0.0;
        for t in 0..n {
            let rng = TrialRng::new(5, t);
            sum += rng.stream(0, LinkClass::SourceRelay, 0).exp(100.0 * model.beta_sr(0));
        }
        let est = sum / n as f64;
        assert!((est - 100.0).abs() <= 3.0 * 100.0 / (n as f64).sqrt(), "{est}");
    }

    #[test]
    fn placement_support_and_mean_radius() {
        let g = geom_example();
        let mut rng = SubRng::from_key(&[1, 2]);
        let n = 100_000usize;
        let pts = place_relays(&g, n, &mut rng);
        let mut sum_r = 0.0;
        for (x, y) in pts {
            let r = ((x - g.s1).powi(2) + (y - g.s2).powi(2)).sqrt();
            assert!(r <= g.s0 + 1e-12);
            sum_r += r;
        }
        // Uniform-disk moment oracle: E[r] = (2/3) s0.
        let mean = sum_r / n as f64;
        let want = 2.0 / 3.0 * g.s0;
        // sigma of r is s0*sqrt(1/2 - 4/9) \approx 0.2357 s0.
        let tol = 3.0 * 0.236 * g.s0 / (n as f64).sqrt();
        assert!((mean - want).abs() <= tol, "{mean} vs {want}");
    }

    #[test]
    fn degenerate_disk_places_all_relays_at_center() {
        let g = Geometry::new(0.0, 0.3, 0.1, 3.0).unwrap();
        let mut rng = SubRng::from_key(&[4]);
        for (x, y) in place_relays(&g, 100, &mut rng) {
            assert_eq!((x, y), (0.3, 0.1));
        }
    }

    #[test]
    fn worst_case_beta_lower_bounds_exact_geometry() {
        // The simplified worst-case variance never exceeds any per-relay
        // variance of an actual placement.
        let g = geom_example();
        let worst = variances_from_geometry(&g).unwrap();
        let mut rng = SubRng::from_key(&[77]);
        for _ in 0..200 {
            let pos = place_relays(&g, 3, &mut rng);
            let exact = ChannelModel::from_positions(&g, &pos).unwrap();
            for j in 0..3 {
                assert!(worst.beta1 <= exact.beta_sr(j) + 1e-12);
                assert!(worst.beta2 <= exact.beta_rd(j) + 1e-12);
                for i in 0..3 {
                    if i != j {
                        assert!(worst.beta3 <= exact.beta_rr(i, j) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn two_hop_below_min_gain_on_a_million_pairs() {
        let mut rng = SubRng::from_key(&[123]);
        for _ in 0..1_000_000 {
            let a = rng.exp(30.0);
            let b = rng.exp(30.0);
            assert!(af_two_hop_snr(a, b) <= a.min(b));
        }
    }

    proptest! {
        #[test]
        fn two_hop_never_exceeds_min(a in 0.0..1e4f64, b in 0.0..1e4f64) {
            prop_assert!(af_two_hop_snr(a, b) <= a.min(b) + 1e-12);
        }

        #[test]
        fn multi_hop_monotone_in_every_gain(
            a1 in 0.01..100.0f64,
            c2 in 0.01..100.0f64,
            b in 0.01..100.0f64,
            bump in 0.01..10.0f64,
        ) {
            let base = af_multi_hop_snr(&[a1, c2], b);
            prop_assert!(af_multi_hop_snr(&[a1 + bump, c2], b) >= base - 1e-12);
            prop_assert!(af_multi_hop_snr(&[a1, c2 + bump], b) >= base - 1e-12);
            prop_assert!(af_multi_hop_snr(&[a1, c2], b + bump) >= base - 1e-12);
        }

        #[test]
        fn multi_hop_single_element_equals_two_hop(a in 0.001..1e3f64, b in 0.001..1e3f64) {
            let lhs = af_multi_hop_snr(&[a], b);
            let rhs = af_two_hop_snr(a, b);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-12));
        }
    }
}
