//! Threshold assignment for the overhearing protocol: the per-hop
//! aggregate `psi_k`, growth-rate diagnostics, the log-scale assignment
//! rule, and the bisection search for the smallest effective threshold.

use crate::error::{Error, Result};
use crate::outage::{p_out_soaf_b_surrogate, OutageParams};
use crate::special::q_func;

/// Fixed positive ratios between the per-hop thresholds.
#[derive(Debug, Clone)]
pub struct ThresholdRatios {
    v: Vec<f64>,
}

impl ThresholdRatios {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain("ratio entries must all be > 0".into()));
        }
        Ok(ThresholdRatios { v })
    }

    /// The default `[1, 2, ..., min(m, N)]` ladder.
    pub fn default_for(len: usize) -> Self {
        ThresholdRatios {
            v: (1..=len).map(|i| i as f64).collect(),
        }
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }
}

/// Per-hop SNR thresholds (linear).
#[derive(Debug, Clone)]
pub struct ThresholdVector {
    deltas: Vec<f64>,
}

impl ThresholdVector {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::Domain("thresholds must be >= 0".into()));
        }
        Ok(ThresholdVector { deltas })
    }

    /// `delta_e * [v_1, ..., v_k]`.
    pub fn from_scale(delta_e: f64, ratios: &ThresholdRatios) -> Result<Self> {
        ThresholdVector::new(ratios.v().iter().map(|&v| v * delta_e).collect())
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Code-derived quantities driving the threshold conditions.
#[derive(Debug, Clone, Copy)]
pub struct CodeMetrics {
    /// Squared minimum codeword distance at unit average symbol energy.
    pub d_m_sq: f64,
    /// Multiplicity of the minimum distance (per information symbol).
    pub omega_dm: f64,
    /// Safety margin subtracted from the distance.
    pub eps0: f64,
}

impl CodeMetrics {
    pub fn new(d_m_sq: f64, omega_dm: f64, eps0: f64) -> Result<Self> {
        if !(d_m_sq > 0.0) || !(omega_dm > 0.0) {
            return Err(Error::Domain("code metrics must be positive".into()));
        }
        if !(eps0 > 0.0 && eps0 < d_m_sq) {
            return Err(Error::Domain(format!(
                "eps0 must lie in (0, d_m^2) = (0, {d_m_sq}), got {eps0}"
            )));
        }
        Ok(CodeMetrics {
            d_m_sq,
            omega_dm,
            eps0,
        })
    }

    /// Margin-adjusted squared distance `(d_m^2 - eps0)^2 / d_m^2`.
    pub fn d_m_eps_sq(&self) -> f64 {
        (self.d_m_sq - self.eps0) * (self.d_m_sq - self.eps0) / self.d_m_sq
    }

    /// The slow-decay scale `1 / (ln rho)^2` used in the derivations; kept
    /// as a diagnostic helper.
    pub fn tau(rho: f64) -> f64 {
        1.0 / (rho.ln() * rho.ln())
    }
}

/// Aggregate chain quality `psi_k = (prod_i (1 + 1/Delta_i) - 1)^(-1)`.
///
/// Satisfies `psi_k <= min_i Delta_i` and is increasing in every entry.
pub fn psi_k(deltas: &[f64]) -> Result<f64> {
    if deltas.is_empty() {
        return Err(Error::Domain("psi_k needs at least one threshold".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("psi_k requires all thresholds > 0".into()));
    }
    let prod: f64 = deltas.iter().map(|&d| 1.0 + 1.0 / d).product();
    Ok(1.0 / (prod - 1.0))
}

/// Result of the growth-rate diagnostic for a threshold schedule.
#[derive(Debug, Clone)]
pub struct GrowthDiagnostic {
    /// Extrapolated limit of `ln Delta(rho) / ln rho`.
    pub limit: f64,
    /// Raw ratio at each ladder point, for inspection.
    pub ratios: Vec<(f64, f64)>,
    /// Whether the limit is zero within tolerance.
    pub passes: bool,
}

/// Checks that a threshold schedule grows sub-polynomially in the SNR:
/// the extrapolated limit of `ln Delta_k(rho) / ln rho` must be zero.
///
/// The limit is extrapolated by least-squares fitting
/// `ln Delta = A + B ln ln rho + C ln rho` over the ladder and reporting
/// `C`; for any schedule of the form `lambda * ln rho` or a constant this
/// yields (numerically) zero, while `Delta = rho^p` yields `p`. Passes iff
/// `|C| <= 1e-2`.
pub fn check_condition_growth<F: Fn(f64) -> f64>(
    schedule: F,
    rho_ladder: &[f64],
) -> Result<GrowthDiagnostic> {
    if rho_ladder.len() < 4 {
        return Err(Error::Domain("need at least 4 ladder points".into()));
    }
    let mut rows = Vec::with_capacity(rho_ladder.len());
    let mut ratios = Vec::with_capacity(rho_ladder.len());
    for &rho in rho_ladder {
        if !(rho > 1.0) {
            return Err(Error::Domain("ladder entries must exceed 1".into()));
        }
        let d = schedule(rho);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Numerical(format!(
                "schedule not evaluable at rho = {rho} (got {d})"
            )));
        }
        let lr = rho.ln();
        rows.push(([1.0, lr.ln(), lr], d.ln()));
        ratios.push((rho, d.ln() / lr));
    }
    // Normal equations for the 3-parameter fit.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (x, y) in &rows {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += x[i] * x[j];
            }
            atb[i] += x[i] * y;
        }
    }
    let c = solve3(ata, atb).ok_or_else(|| {
        Error::Numerical("degenerate ladder for growth-rate extrapolation".into())
    })?;
    let limit = c[2];
    Ok(GrowthDiagnostic {
        limit,
        ratios,
        passes: limit.abs() <= 1e-2,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() < 1e-30 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Smallest `lambda_e` such that the schedule `lambda_e * v * ln rho`
/// satisfies the asymptotic chain-quality condition for every hop count:
/// `lambda_e = max_k (4 / d_m_eps^2) [m (N - k + 1) - 1] sum_{i<=k} 1/v_i`.
pub fn min_lambda_log_scale(
    m: usize,
    n_max: usize,
    ratios: &ThresholdRatios,
    metrics: &CodeMetrics,
) -> f64 {
    let kmax = m.min(n_max).min(ratios.v().len());
    let mut lambda = 0.0f64;
    let mut inv_sum = 0.0;
    for k in 1..=kmax {
        inv_sum += 1.0 / ratios.v()[k - 1];
        let req = 4.0 / metrics.d_m_eps_sq() * ((m * (n_max - k + 1)) as f64 - 1.0) * inv_sum;
        lambda = lambda.max(req);
    }
    lambda.max(0.0)
}

/// Search controls for [`find_effective_threshold`].
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Relative bisection tolerance.
    pub rel_tol: f64,
    /// Upper limit for bracket expansion.
    pub max_delta_e: f64,
    /// Scale applied to the right-hand side before comparing; 1 reproduces
    /// the plain condition, smaller values demand a stronger margin.
    pub rhs_scale: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            rel_tol: 1e-6,
            max_delta_e: 1e9,
            rhs_scale: 1.0,
        }
    }
}

/// Left-hand side of the k-th threshold condition at effective threshold
/// `delta_e`: the dominant-distance bound on a k-hop relayed decoding error,
/// scaled by the surrogate outage after `k - 1` rounds.
pub fn search_condition_lhs(
    k: usize,
    delta_e: f64,
    ratios: &ThresholdRatios,
    metrics: &CodeMetrics,
    p: &OutageParams,
) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(Error::Domain(format!(
            "delta_e must be > 0 for the chain aggregate, got {delta_e}"
        )));
    }
    let kmax = p.m.min(p.n_max);
    if k == 0 || k > kmax || ratios.v().len() < kmax {
        return Err(Error::Config(format!("hop index k = {k} out of range 1..={kmax}")));
    }
    let v = ratios.v();
    let deltas: Vec<f64> = v[..k].iter().map(|&vi| vi * delta_e).collect();
    let psi = psi_k(&deltas)?;
    let dme = metrics.d_m_eps_sq();
    let var_factor = v[0] / p.vars.beta1
        + v[1..k].iter().map(|&vi| vi / p.vars.beta3).sum::<f64>();
    let lhs = metrics.omega_dm / (p.m as f64).powi((p.n_max - k) as i32)
        * q_func((dme * psi / 2.0).sqrt())
        * (1.0 / p.rho)
        * (4.0 * delta_e / (dme * psi) + delta_e)
        * var_factor
        * p_out_soaf_b_surrogate(k - 1, delta_e, ratios, p)?;
    Ok(lhs)
}

/// Right-hand side of every condition: the surrogate outage after the final
/// round, nondecreasing in `delta_e`.
pub fn search_condition_rhs(
    delta_e: f64,
    ratios: &ThresholdRatios,
    p: &OutageParams,
) -> Result<f64> {
    p_out_soaf_b_surrogate(p.n_max, delta_e, ratios, p)
}

/// Outcome of the effective-threshold search.
#[derive(Debug, Clone)]
pub struct EffectiveThreshold {
    /// Smallest effective threshold satisfying every hop condition.
    pub value: f64,
    /// Per-hop smallest satisfying points.
    pub per_k: Vec<f64>,
}

impl EffectiveThreshold {
    /// The induced threshold vector `value * v`.
    pub fn thresholds(&self, ratios: &ThresholdRatios) -> ThresholdVector {
        ThresholdVector::from_scale(self.value, ratios).expect("positive scale")
    }
}

/// Finds, for each hop count k, the smallest effective threshold at which
/// the k-th condition holds (bracket expansion followed by bisection), and
/// returns their maximum. The left side blows up as `delta_e -> 0+` and
/// decays to zero as `delta_e -> inf` while the right side is bounded and
/// nondecreasing, so a crossing always exists.
pub fn find_effective_threshold(
    ratios: &ThresholdRatios,
    metrics: &CodeMetrics,
    p: &OutageParams,
    opts: &SearchOptions,
) -> Result<EffectiveThreshold> {
    let kmax = p.m.min(p.n_max);
    let satisfied = |k: usize, de: f64| -> Result<bool> {
        let lhs = search_condition_lhs(k, de, ratios, metrics, p)?;
        let rhs = search_condition_rhs(de, ratios, p)? * opts.rhs_scale;
        Ok(lhs <= rhs)
    };

    let search_from = |k: usize, start: f64| -> Result<f64> {
        let mut lo;
        let mut hi = start;
        if satisfied(k, hi)? {
            return Ok(hi);
        }
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > opts.max_delta_e {
                return Err(Error::SearchFailure(format!(
                    "no satisfying effective threshold below {} for hop {k} at rho = {}",
                    opts.max_delta_e, p.rho
                )));
            }
            if satisfied(k, hi)? {
                break;
            }
        }
        // Bisect the violated/satisfied bracket down to relative tolerance.
        while (hi - lo) > opts.rel_tol * hi {
            let mid = 0.5 * (lo + hi);
            if satisfied(k, mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    };

    let mut per_k = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        per_k.push(search_from(k, 1e-3)?);
    }
    let mut star = per_k.iter().cloned().fold(0.0, f64::max);

    // The left sides are not monotone, so re-verify every condition at the
    // max and push the search upward if a re-crossing violates one.
    for _ in 0..32 {
        let mut all_ok = true;
        for k in 1..=kmax {
            if !satisfied(k, star)? {
                all_ok = false;
                star = search_from(k, star)?;
            }
        }
        if all_ok {
            break;
        }
    }
    Ok(EffectiveThreshold {
        value: star,
        per_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::LinkVariances;
    use crate::outage::RateSpec;
    use proptest::prelude::*;

    fn params(rho_db: f64) -> OutageParams {
        OutageParams::new(
            RateSpec::from_rate(1.0).unwrap(),
            3,
            3,
            LinkVariances::unit(),
            10f64.powf(rho_db / 10.0),
        )
        .unwrap()
    }

    fn rate1_metrics() -> CodeMetrics {
        CodeMetrics::new(10.0, 1.0, 1e-5).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert!((psi_k(&[2.5]).unwrap() - 2.5).abs() < 1e-15);
        assert!((psi_k(&[1.0, 1.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(psi_k(&[0.0, 1.0]).is_err());
        assert!(psi_k(&[]).is_err());
    }

    #[test]
    fn growth_check_examples() {
        let ladder: Vec<f64> = (1..=10).map(|i| 10f64.powf(i as f64 * 0.6)).collect();
        // lambda * ln rho passes.
        let d = check_condition_growth(|rho| 3.0 * rho.ln(), &ladder).unwrap();
        assert!(d.passes, "log schedule reported limit {}", d.limit);
        // Constants pass.
        let d = check_condition_growth(|_| 4.2, &ladder).unwrap();
        assert!(d.passes, "constant schedule reported limit {}", d.limit);
        // sqrt(rho) fails with limit 1/2.
        let d = check_condition_growth(|rho| rho.sqrt(), &ladder).unwrap();
        assert!(!d.passes);
        assert!((d.limit - 0.5).abs() < 1e-6, "limit {}", d.limit);
    }

    #[test]
    fn log_scale_assignment_example() {
        // m = 3, N = 3, v = [1,2,3], d_m^2 ~ 10: the one-hop term dominates
        // at 0.4 * 8 * 1 = 3.2.
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        let lambda = min_lambda_log_scale(3, 3, &v, &rate1_metrics());
        assert!((lambda - 3.2).abs() < 1e-3, "lambda_e = {lambda}");

        // Single relay, single round: the bracket m(N-k+1)-1 vanishes.
        let v1 = ThresholdRatios::new(vec![1.0]).unwrap();
        assert_eq!(min_lambda_log_scale(1, 1, &v1, &rate1_metrics()), 0.0);

        // Doubling d_m^2 halves lambda_e (eps0 kept negligible).
        let m2 = CodeMetrics::new(20.0, 1.0, 1e-5).unwrap();
        let halved = min_lambda_log_scale(3, 3, &v, &m2);
        assert!((halved - lambda / 2.0).abs() < 1e-3);
    }

    #[test]
    fn lhs_limits_in_delta_e() {
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        let p = params(20.0);
        let m = rate1_metrics();
        let tiny = search_condition_lhs(2, 1e-6, &v, &m, &p).unwrap();
        let mid = search_condition_lhs(2, 1.0, &v, &m, &p).unwrap();
        let huge = search_condition_lhs(2, 1e4, &v, &m, &p).unwrap();
        assert!(tiny > mid, "LHS must blow up toward delta_e -> 0");
        assert!(huge < 1e-300 || huge < mid * 1e-6, "LHS must vanish for large delta_e");
        assert!(search_condition_lhs(2, 0.0, &v, &m, &p).is_err());
    }

    #[test]
    fn lhs_one_hop_variance_factor_ignores_relay_relay_links() {
        // k = 1 keeps only v1/beta1; changing beta3 must not move it.
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        let m = rate1_metrics();
        let p1 = params(15.0);
        let mut p2 = params(15.0);
        p2.vars.beta3 *= 100.0;
        let a = search_condition_lhs(1, 2.0, &v, &m, &p1).unwrap();
        let b = search_condition_lhs(1, 2.0, &v, &m, &p2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn effective_threshold_certificate() {
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        let m = rate1_metrics();
        let opts = SearchOptions::default();
        for &rho_db in &[10.0, 20.0, 30.0] {
            let p = params(rho_db);
            let star = find_effective_threshold(&v, &m, &p, &opts).unwrap();
            let de = star.value;
            for k in 1..=3 {
                let lhs = search_condition_lhs(k, de, &v, &m, &p).unwrap();
                let rhs = search_condition_rhs(de, &v, &p).unwrap();
                assert!(lhs <= rhs, "condition {k} fails at the optimum, rho {rho_db} dB");
            }
            // Slightly below the optimum at least one condition must fail.
            let shaved = de * (1.0 - 1e-3);
            let any_violated = (1..=3).any(|k| {
                let lhs = search_condition_lhs(k, shaved, &v, &m, &p).unwrap();
                let rhs = search_condition_rhs(shaved, &v, &p).unwrap();
                lhs > rhs
            });
            assert!(any_violated, "no condition binds just below the optimum at {rho_db} dB");
        }
    }

    #[test]
    fn schedule_tracks_log_scale_asymptote() {
        let v = ThresholdRatios::new(vec![1.0, 2.0, 3.0]).unwrap();
        let m = rate1_metrics();
        let lambda_e = min_lambda_log_scale(3, 3, &v, &m);
        let opts = SearchOptions::default();
        let p = params(60.0);
        let star = find_effective_threshold(&v, &m, &p, &opts).unwrap();
        let ratio = star.value / (lambda_e * p.rho.ln());
        assert!(
            (0.5..=2.0).contains(&ratio),
            "value / (lambda_e ln rho) = {ratio}"
        );
    }

    proptest! {
        #[test]
        fn psi_bounded_by_min_threshold(
            d1 in 0.01..50.0f64, d2 in 0.01..50.0f64, d3 in 0.01..50.0f64
        ) {
            let psi = psi_k(&[d1, d2, d3]).unwrap();
            prop_assert!(psi <= d1.min(d2).min(d3) + 1e-12);
        }

        #[test]
        fn psi_increases_with_each_entry(
            d1 in 0.1..20.0f64, d2 in 0.1..20.0f64, bump in 0.01..5.0f64
        ) {
            let base = psi_k(&[d1, d2]).unwrap();
            prop_assert!(psi_k(&[d1 + bump, d2]).unwrap() >= base);
            prop_assert!(psi_k(&[d1, d2 + bump]).unwrap() >= base);
            // Extending the chain shrinks the aggregate.
            prop_assert!(psi_k(&[d1, d2, 5.0]).unwrap() <= base + 1e-12);
        }
    }
}
