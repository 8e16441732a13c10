//! Diversity-order estimation from high-SNR curve points.

use crate::error::{Error, Result};

/// Estimated diversity order: the negative least-squares slope of
/// `log10(value)` against `log10(rho)` over the top decade of the grid.
///
/// `points` are `(rho_db, value)` pairs; at least three points with strictly
/// positive values are required within the top decade.
pub fn diversity_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Domain("need at least 3 points".into()));
    }
    let max_db = points
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let window: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 >= max_db - 10.0)
        .cloned()
        .collect();
    if window.len() < 3 {
        return Err(Error::Domain(
            "need at least 3 points inside the top decade".into(),
        ));
    }
    if window.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::Domain("values must be positive and finite".into()));
    }
    // log10(rho) = rho_db / 10.
    let n = window.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (db, v) in &window {
        let x = db / 10.0;
        let y = v.log10();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Domain("degenerate SNR grid".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    Ok(-slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (0..11)
            .map(|i| {
                let db = 30.0 + i as f64;
                let rho = 10f64.powf(db / 10.0);
                (db, rho.powi(-2))
            })
            .collect();
        let d = diversity_slope(&pts).unwrap();
        assert!((d - 2.0).abs() < 1e-6, "estimated {d}");
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(diversity_slope(&[(10.0, 0.1), (11.0, 0.01)]).is_err());
        assert!(diversity_slope(&[(10.0, 0.1), (11.0, 0.0), (12.0, 0.01)]).is_err());
    }
}
