//! Residual bookkeeping, sampling grids and serialization.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GeomError, Result};

/// Default tolerance for jet-pipeline identities.
pub const TOL_IDENTITY: f64 = 1e-8;
/// Default tolerance for closed-form vs numeric comparisons.
pub const TOL_CLOSED_FORM: f64 = 1e-6;
/// Default tolerance for flow-reconstruction round trips.
pub const TOL_RECONSTRUCTION: f64 = 1e-5;

/// Default seed for randomized sampling; overridable per invocation.
pub const DEFAULT_SEED: u64 = 0x9e3779b97f4a7c15;

/// Per-identity residual summary.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    pub residual_max: f64,
    pub residual_mean: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub sample_count: usize,
    /// Short human-readable description of what was checked.
    pub detail: String,
}

impl VerificationReport {
    /// Builds a report from raw residual samples.
    pub fn from_residuals(
        identity: impl Into<String>,
        detail: impl Into<String>,
        residuals: &[f64],
        tolerance: f64,
    ) -> Result<Self> {
        if residuals.is_empty() {
            return Err(GeomError::EmptyInput("residual list".into()));
        }
        let max = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        Ok(VerificationReport {
            identity: identity.into(),
            residual_max: max,
            residual_mean: mean,
            tolerance,
            passed: max < tolerance,
            sample_count: residuals.len(),
            detail: detail.into(),
        })
    }
}

/// Aggregate verdict over a report list.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub all_passed: bool,
    /// Identity with the largest `residual_max / tolerance` ratio.
    pub worst: Option<String>,
    pub reports: Vec<VerificationReport>,
    pub seed: u64,
}

/// Combines reports into a summary. Reports are sorted by identity name so
/// the output is deterministic however the work was distributed.
pub fn aggregate(mut reports: Vec<VerificationReport>, seed: u64) -> Result<SuiteSummary> {
    if reports.is_empty() {
        return Err(GeomError::EmptyInput("report list".into()));
    }
    reports.sort_by(|a, b| a.identity.cmp(&b.identity));
    let all_passed = reports.iter().all(|r| r.passed);
    let worst = reports
        .iter()
        .max_by(|a, b| {
            let ra = a.residual_max / a.tolerance;
            let rb = b.residual_max / b.tolerance;
            ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|r| r.identity.clone());
    Ok(SuiteSummary {
        all_passed,
        worst,
        reports,
        seed,
    })
}

/// Deterministic sampling configuration: points per chart, a margin kept from
/// every bound, and a seed for the counter-based generator.
#[derive(Clone, Debug, Serialize)]
pub struct SamplingGrid {
    pub count: usize,
    pub margin: f64,
    pub seed: u64,
}

impl SamplingGrid {
    pub fn new(count: usize, margin: f64, seed: u64) -> Self {
        SamplingGrid { count, margin, seed }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Uniform random points strictly inside `bounds` by the margin.
    ///
    /// The margin is interpreted relative to each interval's width when the
    /// width is below one, absolute otherwise.
    pub fn points(&self, bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
        let mut rng = self.rng();
        (0..self.count)
            .map(|_| {
                bounds
                    .iter()
                    .map(|&(lo, hi)| {
                        let m = self.margin * (hi - lo).min(1.0);
                        rng.gen_range(lo + m..hi - m)
                    })
                    .collect()
            })
            .collect()
    }

    /// Uniform grid on an interval, inset by the margin.
    pub fn line(&self, lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let m = self.margin * (hi - lo).min(1.0);
        let (a, b) = (lo + m, hi - m);
        (0..count)
            .map(|i| a + (b - a) * i as f64 / (count.max(2) - 1) as f64)
            .collect()
    }

    /// Random direction vectors with entries in `[-1, 1]`.
    pub fn directions(&self, dim: usize, count: usize) -> Vec<Vec<f64>> {
        let mut rng = self.rng();
        (0..count)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }
}

/// Serializes any report value as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Formats a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a numeric CSV: header row, comma separator, LF line endings.
pub fn to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_flags_worst_offender() {
        let r1 = VerificationReport::from_residuals("a", "", &[1e-12, 2e-12], 1e-8).unwrap();
        let r2 = VerificationReport::from_residuals("b", "", &[1e-3], 1e-8).unwrap();
        let s = aggregate(vec![r1.clone(), r2], 0).unwrap();
        assert!(!s.all_passed);
        assert_eq!(s.worst.as_deref(), Some("b"));

        let s2 = aggregate(vec![r1], 0).unwrap();
        assert!(s2.all_passed);
        assert!(aggregate(vec![], 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_respects_margins() {
        let g = SamplingGrid::new(50, 0.05, 42);
        let bounds = vec![(0.0, 1.0), (-2.0, 2.0)];
        let a = g.points(&bounds);
        let b = g.points(&bounds);
        assert_eq!(a, b);
        for p in &a {
            assert!(p[0] > 0.05 - 1e-15 && p[0] < 0.95 + 1e-15);
            assert!(p[1] > -2.0 + 0.05 && p[1] < 2.0 - 0.05);
        }
        let c = SamplingGrid::new(50, 0.05, 43).points(&bounds);
        assert_ne!(a, c);
    }

    #[test]
    fn json_round_trips_floats_bit_exactly() {
        #[derive(Serialize)]
        struct W {
            x: f64,
        }
        let v = 0.1234567890123456789f64.sin();
        let s = to_json(&W { x: v });
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["x"].as_f64().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let csv = to_csv(&["t", "rho"], &[vec![0.0, 1.0], vec![0.5, 2.0]]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t,rho");
        let parsed: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 2.0);
    }
}
