//! Deterministic CSV emission for scenario results.

use std::io::Write;

use crate::error::Result;

/// One output row of a scenario run.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub scenario: String,
    pub protocol: String,
    pub code: String,
    pub rho_db: f64,
    pub n: usize,
    /// Probability or throughput, depending on the scenario.
    pub value: f64,
    /// Confidence half-width for Monte-Carlo points; `None` for analytic
    /// values.
    pub ci: Option<f64>,
    /// Semicolon-joined markers: `mc`, `analytic`, `bound`, `low-confidence`.
    pub flags: String,
}

impl CurvePoint {
    fn fmt_value(v: f64) -> String {
        format!("{v:.10e}")
    }

    pub fn to_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.scenario,
            self.protocol,
            self.code,
            format_args!("{:.4}", self.rho_db),
            self.n,
            Self::fmt_value(self.value),
            self.ci.map(Self::fmt_value).unwrap_or_default(),
            self.flags
        )
    }
}

pub const CSV_HEADER: &str = "scenario,protocol,code,rho_db,n,value,ci,flags";

/// Write header comments, the column header, and all rows.
pub fn write_csv<W: Write>(
    mut w: W,
    header_lines: &[String],
    points: &[CurvePoint],
) -> Result<()> {
    for line in header_lines {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{}", p.to_row())?;
    }
    Ok(())
}

/// Marks Monte-Carlo points with fewer than 100 observed failures.
pub fn mc_flags(p: f64, trials: u64) -> String {
    let failures = (p * trials as f64).round() as u64;
    if failures < 100 {
        "mc;low-confidence".to_string()
    } else {
        "mc".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stable_strings() {
        let p = CurvePoint {
            scenario: "s".into(),
            protocol: "saf".into(),
            code: "rate-1".into(),
            rho_db: 12.5,
            n: 3,
            value: 0.001234,
            ci: Some(1e-5),
            flags: "mc".into(),
        };
        assert_eq!(
            p.to_row(),
            "s,saf,rate-1,12.5000,3,1.2340000000e-3,1.0000000000e-5,mc"
        );
        let mut buf = Vec::new();
        write_csv(&mut buf, &["# a=1".into()], &[p]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# a=1\nscenario,"));
    }

    #[test]
    fn low_confidence_flagging() {
        assert_eq!(mc_flags(0.5, 1000), "mc");
        assert_eq!(mc_flags(1e-6, 1000), "mc;low-confidence");
    }
}
