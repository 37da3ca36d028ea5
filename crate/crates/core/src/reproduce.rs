//! Recomputes the published correlation table from the published score tables.

use serde::Serialize;

use crate::error::Result;
use crate::fixtures::{self, PublishedCell};
use crate::pipeline::{correlate, CorrelationOutput};
use crate::statcorr::{Coefficient, CorrelationScope, PermutationConfig, Verdict};

/// Allowed gap between a recomputed and a published coefficient.
pub const VALUE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub row: String,
    pub coefficient: Coefficient,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reproduction {
    pub output: CorrelationOutput,
    pub checks: Vec<Check>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A published value must match within [`VALUE_TOLERANCE`] with the same
/// bucket; a published "No" must come out as no correlation.
pub fn reproduce_table3(permutation: PermutationConfig) -> Result<Reproduction> {
    let (d, d_prime) = (fixtures::table2_d(), fixtures::table2_d_prime());
    let output = correlate(
        &d,
        &d_prime,
        &[CorrelationScope::General, CorrelationScope::PerMetric],
        permutation,
    )?;
    let published = fixtures::table3();
    let mut checks = Vec::new();
    for report in &output.reports {
        let key = report.metric.map_or_else(|| "general".to_string(), |m| m.to_string());
        let Some(row) = published.get(&key) else { continue };
        for coefficient in Coefficient::ALL {
            let cell: Option<PublishedCell> = match coefficient {
                Coefficient::Pearson => row.pearson,
                Coefficient::Spearman => row.spearman,
                Coefficient::Kendall => row.kendall,
            };
            let e = report.estimate(coefficient);
            let observed = format!(
                "{:.3} (p={:.4}, bucket {}, {})",
                e.value,
                e.p_value,
                serde_json::to_string(&e.bucket).unwrap_or_default().trim_matches('"'),
                serde_json::to_string(&e.verdict).unwrap_or_default().trim_matches('"'),
            );
            let (expected, passed) = match cell {
                None => ("no-correlation".to_string(), e.verdict == Verdict::NoCorrelation),
                Some(c) => (
                    format!(
                        "{:.2} ± {VALUE_TOLERANCE}, bucket {}",
                        c.value,
                        serde_json::to_string(&c.bucket).unwrap_or_default().trim_matches('"')
                    ),
                    (e.value - c.value).abs() <= VALUE_TOLERANCE
                        && e.bucket == c.bucket
                        && e.verdict == Verdict::Reported,
                ),
            };
            checks.push(Check {
                row: report.row_label(),
                coefficient,
                expected,
                observed,
                passed,
            });
        }
    }
    Ok(Reproduction { output, checks })
}
