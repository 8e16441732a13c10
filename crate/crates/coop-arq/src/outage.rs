//! Closed-form outage probabilities and bounds for the ARQ relaying schemes.
//!
//! Everything here is a deterministic function of the system parameters:
//! the exact single-relay forms, the opportunistic variants built on a
//! permutation recursion, and the qualified-set enumeration that lower-bounds
//! the overhearing protocol. The Monte-Carlo engine in [`crate::protocol`]
//! is the independent cross-check for all of it.

use crate::error::{Error, Result};
use crate::fading::LinkVariances;
use crate::special::gen_inc_gamma;
use crate::threshold::{ThresholdRatios, ThresholdVector};

/// Spectral efficiency and the induced outage threshold `delta = 2^R - 1`.
#[derive(Debug, Clone, Copy)]
pub struct RateSpec {
    r: f64,
    delta: f64,
}

impl RateSpec {
    pub fn from_rate(r: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("rate must be >= 0, got {r}")));
        }
        Ok(RateSpec {
            r,
            delta: libm::exp2(r) - 1.0,
        })
    }

    pub fn rate(&self) -> f64 {
        self.r
    }

    /// Outage SNR threshold `delta = 2^R - 1` (linear).
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `delta = 2^R - 1`.
pub fn delta_of_rate(r: f64) -> f64 {
    libm::exp2(r) - 1.0
}

/// Parameters of an outage evaluation.
#[derive(Debug, Clone)]
pub struct OutageParams {
    pub rate: RateSpec,
    /// Number of relays.
    pub m: usize,
    /// Maximum number of ARQ rounds after the initial transmission.
    pub n_max: usize,
    pub vars: LinkVariances,
    /// Average SNR (linear).
    pub rho: f64,
}

impl OutageParams {
    pub fn new(rate: RateSpec, m: usize, n_max: usize, vars: LinkVariances, rho: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("m must be >= 1".into()));
        }
        if n_max < 1 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("rho must be > 0, got {rho}")));
        }
        Ok(OutageParams {
            rate,
            m,
            n_max,
            vars,
            rho,
        })
    }

    #[inline]
    pub fn pr_w_below_delta(&self) -> f64 {
        -libm::expm1(-self.rate.delta / (self.rho * self.vars.beta0))
    }

    #[inline]
    pub fn pr_a_at_most(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -libm::expm1(-x / (self.rho * self.vars.beta1))
        }
    }

    #[inline]
    pub fn pr_a_above(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-x / (self.rho * self.vars.beta1)).exp()
        }
    }

    #[inline]
    pub fn pr_b_below_delta(&self) -> f64 {
        -libm::expm1(-self.rate.delta / (self.rho * self.vars.beta2))
    }

    #[inline]
    pub fn pr_c_at_most(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -libm::expm1(-x / (self.rho * self.vars.beta3))
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Outage probability of `ell` consecutive AF retransmissions with a frozen
/// source-relay gain above `thresh` (exact closed form).
///
/// `F(thresh, 0)` is 1 by convention. For `ell > 0` the value branches on
/// `thresh < delta` versus `thresh >= delta`. It is evaluated by direct
/// adaptive quadrature of the defining joint-probability integral, which
/// keeps full relative accuracy at high SNR; the equivalent alternating
/// expansion in the generalized incomplete gamma function
/// ([`f_exact_gamma_expansion`]) loses all significance there and is kept only
/// as a moderate-SNR cross-check.
pub fn f_exact(thresh: f64, ell: usize, p: &OutageParams) -> Result<f64> {
    if ell == 0 {
        return Ok(1.0);
    }
    let delta = p.rate.delta;
    if delta == 0.0 {
        // Any nonnegative SNR passes a zero threshold: no outage possible.
        return Ok(0.0);
    }
    let rb1 = p.rho * p.vars.beta1;
    let rb2 = p.rho * p.vars.beta2;

    // Below the outage point the event splits exactly:
    //   Pr{thresh < a <= delta} + F(delta, ell).
    let (lower, head) = if thresh >= delta {
        (thresh, 0.0)
    } else {
        (delta, (-thresh / rb1).exp() - (-delta / rb1).exp())
    };

    // Integrand: (1 - e^{-s(x)})^ell with the conditional outage exponent
    // s(x) = delta (x + 1) / (rb2 (x - delta)), against the gain density.
    // At or below the outage point the round fails surely (s -> infinity).
    let g = |x: f64| -> f64 {
        let dens = (-x / rb1).exp() / rb1;
        if x <= delta {
            return dens;
        }
        let s = delta * (x + 1.0) / (rb2 * (x - delta));
        let base = -libm::expm1(-s);
        base.powi(ell as i32) * dens
    };

    // Boundary layer where s ~ 1 has width scale c near the outage point;
    // resolve it with explicit knots, then the exponential tail.
    let c = delta * (delta + 1.0) / rb2;
    let mut knots = vec![lower];
    if lower <= delta + 100.0 * c {
        for f in [0.025, 0.1, 0.5, 2.5, 10.0, 50.0, 100.0] {
            let k = delta + f * c;
            if k > lower {
                knots.push(k);
            }
        }
    }
    let tail_end = (lower + 60.0 * rb1).max(delta + 200.0 * c);
    knots.push((lower + 2.0 * rb1).min(tail_end));
    knots.push(tail_end);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-300);

    let mut tail = 0.0;
    for w in knots.windows(2) {
        tail += crate::special::integrate(&g, w[0], w[1])?;
    }
    Ok(head + tail)
}

/// The alternating-sum form of [`f_exact`] built on the generalized
/// incomplete gamma function. Numerically valid at moderate SNR only; used
/// as an independent evaluation route in tests.
pub fn f_exact_gamma_expansion(thresh: f64, ell: usize, p: &OutageParams) -> Result<f64> {
    if ell == 0 {
        return Ok(1.0);
    }
    let delta = p.rate.delta;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let rb1 = p.rho * p.vars.beta1;
    let rb2 = p.rho * p.vars.beta2;
    let x_low = if thresh >= delta {
        (thresh - delta) / rb1
    } else {
        0.0
    };
    let front = (-thresh / rb1).exp();
    let mut sum = 0.0f64;
    for i in 1..=ell {
        let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
        let coeff = binom(ell, i);
        let expo = (-(delta / rb1) - (i as f64) * delta / rb2).exp();
        let g = gen_inc_gamma(1.0, x_low, (i as f64) * (delta * delta + delta) / (rb1 * rb2))?;
        sum += sign * coeff * expo * g;
    }
    Ok((front + sum).max(0.0))
}

/// Product-form lower bound for [`f_exact`]:
/// `Pr{a > thresh} * Pr{b < delta}^ell`, with the same `ell = 0` convention.
pub fn f_lower_bound(thresh: f64, ell: usize, p: &OutageParams) -> f64 {
    if ell == 0 {
        return 1.0;
    }
    p.pr_a_above(thresh) * p.pr_b_below_delta().powi(ell as i32)
}

#[derive(Debug, Clone, Copy)]
enum FKind {
    Exact,
    LowerBound,
}

fn f_eval(kind: FKind, thresh: f64, ell: usize, p: &OutageParams) -> Result<f64> {
    match kind {
        FKind::Exact => f_exact(thresh, ell, p),
        FKind::LowerBound => Ok(f_lower_bound(thresh, ell, p)),
    }
}

fn p_out_saf_kind(n: usize, thresh: f64, p: &OutageParams, kind: FKind) -> Result<f64> {
    if n > p.n_max {
        return Err(Error::Domain(format!("n = {n} exceeds N = {}", p.n_max)));
    }
    let pw = p.pr_w_below_delta();
    let pa = p.pr_a_at_most(thresh);
    let mut sum = 0.0;
    for ell in 0..=n {
        sum += (pa * pw).powi((n - ell) as i32) * f_eval(kind, thresh, ell, p)?;
    }
    Ok(pw * sum)
}

/// Outage probability after `n` ARQ rounds of single-relay selective AF.
pub fn p_out_saf(n: usize, thresh: f64, p: &OutageParams) -> Result<f64> {
    p_out_saf_kind(n, thresh, p, FKind::Exact)
}

/// Lower bound on [`p_out_saf`] obtained by substituting the product-form
/// bound for the retransmission factor.
pub fn p_out_saf_lower_bound(n: usize, thresh: f64, p: &OutageParams) -> Result<f64> {
    p_out_saf_kind(n, thresh, p, FKind::LowerBound)
}

/// Plain AF is selective AF with a zero threshold.
pub fn p_out_af(n: usize, p: &OutageParams) -> Result<f64> {
    p_out_saf(n, 0.0, p)
}

/// Outage probability of opportunistic AF across `m` relays:
/// `Pr{w < delta} * F(0, n)^m`.
pub fn p_out_oaf(n: usize, p: &OutageParams) -> Result<f64> {
    if n > p.n_max {
        return Err(Error::Domain(format!("n = {n} exceeds N = {}", p.n_max)));
    }
    Ok(p.pr_w_below_delta() * f_exact(0.0, n, p)?.powi(p.m as i32))
}

/// Indicator used by the permutation recursion: 1 when the split puts all or
/// none of the remaining rounds on the current relay.
fn mu(zi: usize, zi_m1: usize) -> u32 {
    let d = |x: usize| -> i32 { i32::from(x == 0) };
    (d(zi - zi_m1.min(zi)) + d(zi_m1) - d(zi + zi_m1)).max(0) as u32
}

fn permutation_outage_kind(thresh: f64, ell: usize, q: usize, p: &OutageParams, kind: FKind) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("qualified-set size must be >= 1".into()));
    }
    // F values get reused heavily through the recursion; precompute.
    let mut f_table = vec![0.0; q * ell + 1];
    for (j, slot) in f_table.iter_mut().enumerate() {
        *slot = f_eval(kind, thresh, j, p)?;
    }
    let pa_above = p.pr_a_above(thresh);

    if q == 1 {
        return Ok(f_table[ell]);
    }

    // level r = number of relays still to split over (r = q down to 2).
    fn recurse(
        level: usize,
        zeta: usize,
        q: usize,
        pa_above: f64,
        f_table: &[f64],
    ) -> f64 {
        if level == 2 {
            let mut acc = 0.0;
            for z1 in 0..=zeta {
                acc += binom(zeta, z1)
                    * pa_above.powi(mu(zeta, z1) as i32)
                    * f_table[q * (zeta - z1)]
                    * f_table[q * z1];
            }
            return acc;
        }
        let mut acc = 0.0;
        for z in 0..=zeta {
            acc += binom(zeta, z)
                * pa_above.powi(mu(zeta, z) as i32)
                * f_table[q * (zeta - z)]
                * recurse(level - 1, z, q, pa_above, f_table);
        }
        acc
    }

    Ok(recurse(q, ell, q, pa_above, &f_table))
}

/// Summed outage probability of `ell` retransmissions over all permutations
/// of `q` active relays drawn from a qualified set of size `q`.
pub fn permutation_outage_sum(thresh: f64, ell: usize, q: usize, p: &OutageParams) -> Result<f64> {
    permutation_outage_kind(thresh, ell, q, p, FKind::Exact)
}

fn g1_kind(thresh: f64, ell: usize, p: &OutageParams, kind: FKind) -> Result<f64> {
    if ell == 0 {
        return Ok(1.0);
    }
    let m = p.m;
    let pa_le = p.pr_a_at_most(thresh);
    let mut acc = 0.0;
    for q in 1..=m {
        let kernel = match kind {
            FKind::Exact => {
                (1.0 / q as f64).powi(ell as i32) * permutation_outage_kind(thresh, ell, q, p, kind)?
            }
            // The recursion with the product-form bound collapses to
            // q^ell Pr{a>thresh}^q Pr{b<delta}^(q ell); the q^ell cancels the
            // selection factor.
            FKind::LowerBound => {
                p.pr_a_above(thresh).powi(q as i32)
                    * p.pr_b_below_delta().powi((q * ell) as i32)
            }
        };
        acc += binom(m, m - q) * pa_le.powi((m - q) as i32) * kernel;
    }
    Ok(acc)
}

fn p_out_soaf_a_kind(n: usize, thresh: f64, p: &OutageParams, kind: FKind) -> Result<f64> {
    if n > p.n_max {
        return Err(Error::Domain(format!("n = {n} exceeds N = {}", p.n_max)));
    }
    let pw = p.pr_w_below_delta();
    let pa_all = p.pr_a_at_most(thresh).powi(p.m as i32);
    let mut sum = 0.0;
    for ell in 0..=n {
        sum += (pa_all * pw).powi((n - ell) as i32) * g1_kind(thresh, ell, p, kind)?;
    }
    Ok(pw * sum)
}

/// Outage probability after `n` rounds of selective-opportunistic AF where
/// the qualified set forms from source transmissions only.
pub fn p_out_soaf_a(n: usize, thresh: f64, p: &OutageParams) -> Result<f64> {
    p_out_soaf_a_kind(n, thresh, p, FKind::Exact)
}

/// Lower bound on [`p_out_soaf_a`].
pub fn p_out_soaf_a_lower_bound(n: usize, thresh: f64, p: &OutageParams) -> Result<f64> {
    p_out_soaf_a_kind(n, thresh, p, FKind::LowerBound)
}

/// Per-hop qualification counts of the overhearing enumeration.
///
/// `q_lk[l][k]` is the number of relays that joined the k-hop subset at the
/// end of round `l`; row 0 corresponds to round 1 (counts join with 1-hop
/// signals there).
#[derive(Debug, Clone)]
pub struct QualifiedSetCount {
    pub q_lk: Vec<Vec<usize>>,
    pub m: usize,
}

impl QualifiedSetCount {
    pub fn total(&self) -> usize {
        self.q_lk.iter().map(|row| row.iter().sum::<usize>()).sum()
    }

    pub fn is_valid(&self) -> bool {
        if self.total() > self.m {
            return false;
        }
        for (li, row) in self.q_lk.iter().enumerate() {
            let l = li + 1;
            for (ki, &q) in row.iter().enumerate() {
                let k = ki + 1;
                if q > 0 && k > l.min(self.m) {
                    return false;
                }
            }
        }
        true
    }
}

/// Per-round probability kernels for the qualified-set enumeration.
///
/// The plain lower bound keeps the qualification probabilities; the
/// threshold-search surrogate replaces the "gain above threshold" factors by
/// one, which makes the result monotone nondecreasing in the thresholds.
#[derive(Debug, Clone, Copy)]
enum EnumKind {
    LowerBound,
    MonotoneSurrogate,
}

struct SoafBEnum<'a> {
    p: &'a OutageParams,
    thresholds: Vec<f64>,
    kind: EnumKind,
    pb: f64,
    memo: std::collections::HashMap<(usize, usize, Vec<usize>), f64>,
}

impl<'a> SoafBEnum<'a> {
    fn new(p: &'a OutageParams, thresholds: Vec<f64>, kind: EnumKind) -> Self {
        SoafBEnum {
            p,
            thresholds,
            kind,
            pb: p.pr_b_below_delta(),
            memo: std::collections::HashMap::new(),
        }
    }

    fn pr_a_le(&self) -> f64 {
        self.p.pr_a_at_most(self.thresholds[0])
    }

    fn pr_a_above_or_one(&self) -> f64 {
        match self.kind {
            EnumKind::LowerBound => self.p.pr_a_above(self.thresholds[0]),
            EnumKind::MonotoneSurrogate => 1.0,
        }
    }

    fn pr_c_le(&self, k: usize) -> f64 {
        self.p.pr_c_at_most(self.thresholds[k - 1])
    }

    fn pr_c_above_or_one(&self, k: usize) -> f64 {
        match self.kind {
            EnumKind::LowerBound => 1.0 - self.p.pr_c_at_most(self.thresholds[k - 1]),
            EnumKind::MonotoneSurrogate => 1.0,
        }
    }

    /// Sum over qualification histories of rounds `i..=ell`, given per-class
    /// membership counts from the previous round.
    fn tail(&mut self, i: usize, ell: usize, counts: &[usize]) -> f64 {
        if i > ell {
            return 1.0;
        }
        let key = (ell, i, counts.to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let m = self.p.m;
        let q_prev: usize = counts.iter().sum();
        let max_k = i.min(m).min(self.thresholds.len());
        let mut acc = 0.0;
        for k in 2..=max_k {
            // Probability the active relay of round i-1 held a (k-1)-hop
            // signal; empty classes contribute nothing.
            if counts[k - 2] == 0 {
                continue;
            }
            let class_frac = counts[k - 2] as f64 / q_prev as f64;
            for q_new in 0..=(m - q_prev) {
                let f_ik = class_frac
                    * binom(m - q_prev, q_new)
                    * self.pr_c_le(k).powi((m - q_prev - q_new) as i32)
                    * self.pr_c_above_or_one(k).powi(q_new as i32)
                    * self.pb.powi((q_prev + q_new) as i32);
                if f_ik == 0.0 {
                    continue;
                }
                let mut next = counts.to_vec();
                next[k - 1] += q_new;
                acc += f_ik * self.tail(i + 1, ell, &next);
            }
        }
        self.memo.insert(key, acc);
        acc
    }

    /// The `ell`-round relayed-failure factor.
    fn g2(&mut self, ell: usize) -> f64 {
        if ell == 0 {
            return 1.0;
        }
        let m = self.p.m;
        let kmax = self.thresholds.len();
        let mut acc = 0.0;
        for q11 in 1..=m {
            let f11 = binom(m, q11)
                * self.pr_a_le().powi((m - q11) as i32)
                * self.pr_a_above_or_one().powi(q11 as i32)
                * self.pb.powi(q11 as i32);
            if f11 == 0.0 {
                continue;
            }
            let mut counts = vec![0usize; kmax];
            counts[0] = q11;
            acc += f11 * self.tail(2, ell, &counts);
        }
        acc
    }

    fn p_out(&mut self, n: usize) -> Result<f64> {
        if n > self.p.n_max {
            return Err(Error::Domain(format!("n = {n} exceeds N = {}", self.p.n_max)));
        }
        if self.p.m * self.p.n_max > 36 {
            return Err(Error::Complexity(format!(
                "qualified-set enumeration guard: m*N = {} > 36",
                self.p.m * self.p.n_max
            )));
        }
        let pw = self.p.pr_w_below_delta();
        let pa_all = self.pr_a_le().powi(self.p.m as i32);
        let mut sum = 0.0;
        for ell in 0..=n {
            sum += (pa_all * pw).powi((n - ell) as i32) * self.g2(ell);
        }
        Ok(pw * sum)
    }
}

/// Analytic lower bound on the outage probability of the overhearing
/// selective-opportunistic protocol, by enumeration over qualified-set
/// growth histories (noise accumulation on relay receptions ignored).
pub fn p_out_soaf_b_lower_bound(n: usize, thresholds: &ThresholdVector, p: &OutageParams) -> Result<f64> {
    let want = p.m.min(p.n_max);
    if thresholds.deltas().len() != want {
        return Err(Error::Config(format!(
            "threshold vector must have length min(m, N) = {want}, got {}",
            thresholds.deltas().len()
        )));
    }
    SoafBEnum::new(p, thresholds.deltas().to_vec(), EnumKind::LowerBound).p_out(n)
}

/// Monotone surrogate of [`p_out_soaf_b_lower_bound`] used by the threshold
/// search: qualification-success probabilities are replaced by one, making
/// the value nondecreasing in the effective threshold. For
/// `delta_e <= 0` it equals `Pr{w < delta} * Pr{b < delta}^(m n)`.
pub fn p_out_soaf_b_surrogate(
    n: usize,
    delta_e: f64,
    ratios: &ThresholdRatios,
    p: &OutageParams,
) -> Result<f64> {
    let want = p.m.min(p.n_max);
    if ratios.v().len() != want {
        return Err(Error::Config(format!(
            "ratio vector must have length min(m, N) = {want}, got {}",
            ratios.v().len()
        )));
    }
    let thresholds: Vec<f64> = ratios.v().iter().map(|&v| v * delta_e).collect();
    SoafBEnum::new(p, thresholds, EnumKind::MonotoneSurrogate).p_out(n)
}

/// Upper bound on the surrogate that holds for every SNR: the prefactor
/// probabilities are dropped and each round factor is summed as-is.
pub fn soaf_b_surrogate_snr_free_bound(
    n: usize,
    delta_e: f64,
    ratios: &ThresholdRatios,
    p: &OutageParams,
) -> Result<f64> {
    let thresholds: Vec<f64> = ratios.v().iter().map(|&v| v * delta_e).collect();
    let mut e = SoafBEnum::new(p, thresholds, EnumKind::MonotoneSurrogate);
    if p.m * p.n_max > 36 {
        return Err(Error::Complexity("enumeration guard".into()));
    }
    Ok((0..=n).map(|ell| e.g2(ell)).sum())
}

/// Requirement-style feasibility predicate on per-hop threshold multipliers:
/// `prod_i (1 + 1/(lambda_i * delta)) <= 1 + 1/(lambda_low * delta)`.
pub fn requirement1_holds(lambdas: &[f64], lambda_low: f64, delta: f64) -> bool {
    if lambdas.iter().any(|&l| l <= 0.0) || lambda_low <= 1.0 || delta <= 0.0 {
        return false;
    }
    let prod: f64 = lambdas.iter().map(|&l| 1.0 + 1.0 / (l * delta)).product();
    prod <= 1.0 + 1.0 / (lambda_low * delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{LinkClass, TrialRng};

    fn params(rho_db: f64, m: usize, n_max: usize) -> OutageParams {
        OutageParams::new(
            RateSpec::from_rate(1.0).unwrap(),
            m,
            n_max,
            LinkVariances::unit(),
            10f64.powf(rho_db / 10.0),
        )
        .unwrap()
    }

    #[test]
    fn delta_of_rate_examples() {
        assert_eq!(delta_of_rate(1.0), 1.0);
        assert_eq!(delta_of_rate(0.0), 0.0);
        assert_eq!(delta_of_rate(2.0), 3.0);
    }

    #[test]
    fn f_at_zero_rounds_is_one_by_convention() {
        let p = params(10.0, 1, 3);
        assert_eq!(f_exact(5.0, 0, &p).unwrap(), 1.0);
        assert_eq!(f_lower_bound(5.0, 0, &p), 1.0);
    }

    #[test]
    fn f_lower_bound_substitution_and_factorization() {
        let p = params(12.0, 1, 3);
        let d = p.rate.delta();
        let want = 1.0 - (-d / (p.rho * p.vars.beta2)).exp();
        assert!((f_lower_bound(0.0, 1, &p) - want).abs() < 1e-15);
        // Each extra round multiplies by Pr{b < delta}.
        let r = f_lower_bound(2.0, 3, &p) / f_lower_bound(2.0, 2, &p);
        assert!((r - p.pr_b_below_delta()).abs() < 1e-12);
    }

    #[test]
    fn direct_quadrature_agrees_with_gamma_expansion_at_moderate_snr() {
        // Two independent evaluation routes for the same closed form; the
        // expansion is well conditioned below ~25 dB.
        let mut rng = crate::rng::SubRng::from_key(&[77]);
        for _ in 0..300 {
            let rho_db = 0.0 + 22.0 * rng.uniform();
            let p = params(rho_db, 1, 4);
            let thresh = 4.0 * rng.uniform() * p.rate.delta();
            let ell = 1 + (rng.next_u64() % 4) as usize;
            let a = f_exact(thresh, ell, &p).unwrap();
            let b = f_exact_gamma_expansion(thresh, ell, &p).unwrap();
            // The expansion's absolute error floor is the quadrature target
            // times the alternating-term mass (about 2^ell).
            let tol = 1e-6 * a + (1 << ell) as f64 * 1e-8;
            assert!(
                (a - b).abs() <= tol,
                "routes disagree at rho_db={rho_db}, thresh={thresh}, ell={ell}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn f_exact_dominates_lower_bound_on_random_grid() {
        let mut rng = crate::rng::SubRng::from_key(&[21]);
        for _ in 0..1000 {
            let rho_db = 0.0 + 30.0 * rng.uniform();
            let p = params(rho_db, 1, 4);
            let thresh = 4.0 * rng.uniform() * p.rate.delta();
            let ell = (rng.next_u64() % 5) as usize;
            let f = f_exact(thresh, ell, &p).unwrap();
            let ft = f_lower_bound(thresh, ell, &p);
            assert!(
                f >= ft - 1e-9,
                "exact F below its lower bound at rho_db={rho_db}, thresh={thresh}, ell={ell}: {f} vs {ft}"
            );
        }
    }

    #[test]
    fn f_closed_matches_joint_event_sampling_oracle() {
        // Brute-force sampling of the joint event: a > thresh and both
        // relayed rounds in outage, with the same frozen a.
        let p = params(20.0, 1, 3); // rho = 100
        let delta = p.rate.delta();
        let thresh = 2.0 * delta;
        let trials = 10_000_000u64;
        let mut hits = 0u64;
        for t in 0..trials {
            let rng = TrialRng::new(1234, t);
            let a = rng.stream(0, LinkClass::SourceRelay, 0).exp(p.rho * p.vars.beta1);
            if a <= thresh {
                continue;
            }
            let b1 = rng.stream(1, LinkClass::RelayDest, 0).exp(p.rho * p.vars.beta2);
            let b2 = rng.stream(2, LinkClass::RelayDest, 0).exp(p.rho * p.vars.beta2);
            let s1 = a * b1 / (a + b1 + 1.0);
            let s2 = a * b2 / (a + b2 + 1.0);
            if s1 < delta && s2 < delta {
                hits += 1;
            }
        }
        let mc = hits as f64 / trials as f64;
        let cf = f_exact(thresh, 2, &p).unwrap();
        let sigma = (mc * (1.0 - mc) / trials as f64).sqrt();
        assert!(
            (mc - cf).abs() <= 3.0 * sigma,
            "closed form {cf} vs MC {mc} (3 sigma {:.2e})",
            3.0 * sigma
        );
    }

    #[test]
    fn saf_outage_at_zero_rounds_collapses() {
        let p = params(15.0, 1, 3);
        let got = p_out_saf(0, 1.5, &p).unwrap();
        assert!((got - p.pr_w_below_delta()).abs() < 1e-15);
    }

    #[test]
    fn saf_bound_sits_below_exact() {
        let mut rng = crate::rng::SubRng::from_key(&[31]);
        for _ in 0..300 {
            let p = params(5.0 + 25.0 * rng.uniform(), 1, 3);
            let thresh = 3.0 * rng.uniform() * p.rate.delta();
            for n in 0..=3usize {
                let exact = p_out_saf(n, thresh, &p).unwrap();
                let bound = p_out_saf_lower_bound(n, thresh, &p).unwrap();
                assert!(bound <= exact + 1e-12, "n={n}: {bound} > {exact}");
            }
        }
    }

    #[test]
    fn oaf_reduces_to_af_for_single_relay() {
        let p = params(14.0, 1, 3);
        for n in 0..=3 {
            let oaf = p_out_oaf(n, &p).unwrap();
            let af = p_out_af(n, &p).unwrap();
            assert!((oaf - af).abs() <= 1e-12 * af.max(1e-12));
        }
        // n = 0 collapses to the direct-link outage.
        let p3 = params(14.0, 3, 3);
        assert!((p_out_oaf(0, &p3).unwrap() - p3.pr_w_below_delta()).abs() < 1e-15);
    }

    #[test]
    fn cal_f_base_case_is_f() {
        let p = params(12.0, 3, 3);
        for ell in 0..=3 {
            let lhs = permutation_outage_sum(1.7, ell, 1, &p).unwrap();
            let rhs = f_exact(1.7, ell, &p).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-12));
        }
    }

    #[test]
    fn bound_recursion_collapses_to_product_form() {
        // Replacing F with its product bound inside the permutation recursion
        // must give q^ell Pr{a>thresh}^q Pr{b<delta}^(q ell).
        let p = params(9.0, 3, 3);
        let thresh = 1.3;
        for q in 1..=3usize {
            for ell in 1..=3usize {
                let got = permutation_outage_kind(thresh, ell, q, &p, FKind::LowerBound).unwrap();
                let want = (q as f64).powi(ell as i32)
                    * p.pr_a_above(thresh).powi(q as i32)
                    * p.pr_b_below_delta().powi((q * ell) as i32);
                assert!(
                    (got - want).abs() <= 1e-12 * want.max(1e-300),
                    "q={q}, ell={ell}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn cal_f_matches_permutation_sampling_oracle() {
        // q = 2 qualified relays, 2 rounds, all four active-relay sequences:
        // Monte-Carlo of the joint event {both a > thresh, both rounds fail}
        // against (1/q)^ell * calF.
        let p = params(10.0, 2, 2);
        let delta = p.rate.delta();
        let thresh = 1.5 * delta;
        let trials = 4_000_000u64;
        let mut hits = 0u64;
        for t in 0..trials {
            let rng = TrialRng::new(777, t);
            let a: Vec<f64> = (0..2)
                .map(|j| rng.stream(0, LinkClass::SourceRelay, j).exp(p.rho * p.vars.beta1))
                .collect();
            if a.iter().any(|&x| x <= thresh) {
                continue;
            }
            let mut failed = true;
            for round in 1..=2u32 {
                let b: Vec<f64> = (0..2)
                    .map(|j| rng.stream(round, LinkClass::RelayDest, j).exp(p.rho * p.vars.beta2))
                    .collect();
                let sel = if b[0] >= b[1] { 0 } else { 1 };
                let snr = a[sel] * b[sel] / (a[sel] + b[sel] + 1.0);
                if snr >= delta {
                    failed = false;
                    break;
                }
            }
            if failed {
                hits += 1;
            }
        }
        let mc = hits as f64 / trials as f64;
        let analytic = 0.25 * permutation_outage_sum(thresh, 2, 2, &p).unwrap();
        let sigma = (mc * (1.0 - mc) / trials as f64).sqrt();
        assert!(
            (mc - analytic).abs() <= 3.0 * sigma,
            "calF {analytic} vs MC {mc}"
        );
    }

    #[test]
    fn soaf_a_single_relay_equals_saf() {
        let p = params(13.0, 1, 3);
        for n in 0..=3 {
            for &th in &[0.0, 0.8, 1.5, 3.0] {
                let a = p_out_soaf_a(n, th, &p).unwrap();
                let s = p_out_saf(n, th, &p).unwrap();
                assert!((a - s).abs() <= 1e-12 * s.max(1e-15), "n={n}, th={th}");
            }
        }
    }

    #[test]
    fn soaf_a_bound_sits_below_exact() {
        let p = params(15.0, 3, 3);
        for n in 0..=3 {
            for &th in &[0.5, 1.5, 3.0] {
                let exact = p_out_soaf_a(n, th, &p).unwrap();
                let bound = p_out_soaf_a_lower_bound(n, th, &p).unwrap();
                assert!(bound <= exact + 1e-13, "n={n}, th={th}: {bound} > {exact}");
            }
        }
    }

    #[test]
    fn soaf_b_bound_at_zero_rounds_and_zero_threshold_cases() {
        let p = params(12.0, 3, 3);
        let tv = ThresholdVector::new(vec![3.9, 3.9, 3.9]).unwrap();
        let got = p_out_soaf_b_lower_bound(0, &tv, &p).unwrap();
        assert!((got - p.pr_w_below_delta()).abs() < 1e-15);

        // Surrogate with non-positive effective threshold.
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        for n in 0..=3usize {
            let got = p_out_soaf_b_surrogate(n, -1.0, &v, &p).unwrap();
            let want = p.pr_w_below_delta()
                * p.pr_b_below_delta().powi((p.m * n) as i32);
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1e-300),
                "n={n}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn bbss_monotone_in_effective_threshold() {
        let p = params(10.0, 3, 3);
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        let mut rng = crate::rng::SubRng::from_key(&[99]);
        for _ in 0..1000 {
            let lo = 10.0 * rng.uniform();
            let hi = lo + 10.0 * rng.uniform();
            let a = p_out_soaf_b_surrogate(3, lo, &v, &p).unwrap();
            let b = p_out_soaf_b_surrogate(3, hi, &v, &p).unwrap();
            assert!(b >= a - 1e-15, "surrogate not monotone: {a} -> {b}");
        }
    }

    #[test]
    fn bbss_bounded_by_rho_free_sum() {
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        for &rho_db in &[0.0, 10.0, 20.0, 40.0] {
            let p = params(rho_db, 3, 3);
            for &de in &[0.1, 1.0, 10.0, 100.0] {
                let val = p_out_soaf_b_surrogate(3, de, &v, &p).unwrap();
                let bound = soaf_b_surrogate_snr_free_bound(3, de, &v, &p).unwrap();
                assert!(val <= bound + 1e-12, "rho {rho_db} dB, de {de}: {val} > {bound}");
            }
        }
    }

    #[test]
    fn requirement1_example_sets_pass() {
        assert!(requirement1_holds(&[3.9, 3.9, 3.9], 1.01, 1.0));
        assert!(requirement1_holds(&[2.0, 5.0, 10.0], 1.01, 1.0));
        // A clearly too-low set fails.
        assert!(!requirement1_holds(&[1.0, 1.0, 1.0], 1.01, 1.0));
    }

    #[test]
    fn every_outage_form_is_monotone_in_rounds_and_snr() {
        let tv = ThresholdVector::new(vec![3.9, 3.9, 3.9]).unwrap();
        let mut prev_by_rho: Option<Vec<f64>> = None;
        for &rho_db in &[5.0, 10.0, 15.0, 20.0, 25.0] {
            let p = params(rho_db, 3, 3);
            let mut vals = Vec::new();
            let mut prev_n = f64::INFINITY;
            for n in 0..=3 {
                let row = [
                    p_out_saf(n, 1.5, &p).unwrap(),
                    p_out_saf_lower_bound(n, 1.5, &p).unwrap(),
                    p_out_af(n, &p).unwrap(),
                    p_out_oaf(n, &p).unwrap(),
                    p_out_soaf_a(n, 1.5, &p).unwrap(),
                    p_out_soaf_a_lower_bound(n, 1.5, &p).unwrap(),
                    p_out_soaf_b_lower_bound(n, &tv, &p).unwrap(),
                ];
                let max = row.iter().cloned().fold(0.0, f64::max);
                assert!(max <= prev_n + 1e-12, "not nonincreasing in n at {rho_db} dB");
                prev_n = max;
                vals.extend_from_slice(&row);
            }
            if let Some(prev) = prev_by_rho {
                for (new, old) in vals.iter().zip(&prev) {
                    assert!(new <= &(old + 1e-12), "not nonincreasing in rho");
                }
            }
            prev_by_rho = Some(vals);
        }
    }

    #[test]
    fn qualified_set_counts_validate() {
        // Valid history: one relay joins with a 1-hop signal in round 1, two
        // more join with 2-hop signals in round 2.
        let ok = QualifiedSetCount {
            q_lk: vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 0]],
            m: 3,
        };
        assert!(ok.is_valid());
        assert_eq!(ok.total(), 3);
        // Too many relays in total.
        let too_many = QualifiedSetCount {
            q_lk: vec![vec![3, 0, 0], vec![0, 1, 0]],
            m: 3,
        };
        assert!(!too_many.is_valid());
        // A k-hop join before round k is impossible.
        let early = QualifiedSetCount {
            q_lk: vec![vec![0, 1, 0]],
            m: 3,
        };
        assert!(!early.is_valid());
    }

    #[test]
    fn complexity_guard_trips() {
        let p = params(10.0, 7, 6);
        let tv = ThresholdVector::new(vec![2.0; 6]).unwrap();
        assert!(matches!(
            p_out_soaf_b_lower_bound(1, &tv, &p),
            Err(Error::Complexity(_))
        ));
    }
}
