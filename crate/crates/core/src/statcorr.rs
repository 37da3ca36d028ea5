//! Correlation between evaluation tables and dataset statistics.
//!
//! Pearson's r, Spearman's rho (mid-ranks) and Kendall's tau-b, each with a
//! two-sided permutation p-value: exact enumeration for small series,
//! seeded Monte-Carlo otherwise. A coefficient is reported as "no
//! correlation" when its magnitude is below 0.2 or its p-value above 0.3.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::evalmetrics::{EvaluationTable, Metric};
use crate::groundtruth::ExperimentDataset;
use crate::sampling::SeededRng;

/// Below this magnitude a coefficient is reported as no correlation.
pub const MIN_REPORTED_MAGNITUDE: f64 = 0.2;
/// Above this p-value a coefficient is reported as no correlation.
pub const MAX_REPORTED_P_VALUE: f64 = 0.3;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PairedSeries {
    x: Vec<f64>,
    y: Vec<f64>,
    labels: Vec<String>,
}

impl PairedSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if x.len() != y.len() || labels.len() != x.len() {
            return Err(Error::DegenerateSeries(format!(
                "length mismatch: {} x, {} y, {} labels",
                x.len(),
                y.len(),
                labels.len()
            )));
        }
        if x.len() < 3 {
            return Err(Error::DegenerateSeries(format!(
                "need at least 3 pairs, got {}",
                x.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateSeries("non-finite value".into()));
        }
        Ok(PairedSeries { x, y, labels })
    }

    pub fn unlabeled(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let labels = (0..x.len()).map(|i| i.to_string()).collect();
        Self::new(x, y, labels)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Pearson,
    Spearman,
    Kendall,
}

impl Coefficient {
    pub const ALL: [Coefficient; 3] = [Self::Pearson, Self::Spearman, Self::Kendall];
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coefficient::Pearson => "Pearson",
            Coefficient::Spearman => "Spearman",
            Coefficient::Kendall => "Kendall",
        })
    }
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn centered(values: &[f64]) -> (Vec<f64>, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum();
    (c, ss)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// A coefficient prepared for repeated evaluation under permutations of `y`.
enum Prepared {
    Product { x: Vec<f64>, y: Vec<f64>, denom: f64 },
    Concordance { x_signs: Vec<i8>, y: Vec<f64>, denom: f64 },
}

impl Prepared {
    fn new(coefficient: Coefficient, x: &[f64], y: &[f64]) -> Result<Self> {
        match coefficient {
            Coefficient::Pearson => Self::product(x, y, "Pearson"),
            Coefficient::Spearman => Self::product(&mid_ranks(x), &mid_ranks(y), "Spearman"),
            Coefficient::Kendall => {
                let n = x.len();
                let mut x_signs = Vec::with_capacity(n * (n - 1) / 2);
                let (mut untied_x, mut untied_y, mut pairs) = (0usize, 0usize, 0usize);
                for i in 0..n {
                    for j in (i + 1)..n {
                        let s = sign(x[i] - x[j]);
                        x_signs.push(s);
                        pairs += 1;
                        untied_x += usize::from(s != 0);
                        untied_y += usize::from(y[i] != y[j]);
                    }
                }
                if untied_x == 0 || untied_y == 0 || pairs == 0 {
                    return Err(Error::DegenerateSeries("Kendall: a series is constant".into()));
                }
                Ok(Prepared::Concordance {
                    x_signs,
                    y: y.to_vec(),
                    denom: ((untied_x as f64) * (untied_y as f64)).sqrt(),
                })
            }
        }
    }

    fn product(x: &[f64], y: &[f64], name: &str) -> Result<Self> {
        let (xc, sxx) = centered(x);
        let (yc, syy) = centered(y);
        let scale = x.iter().chain(y).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if sxx <= f64::EPSILON * scale * scale || syy <= f64::EPSILON * scale * scale {
            return Err(Error::DegenerateSeries(format!("{name}: zero variance")));
        }
        Ok(Prepared::Product {
            x: xc,
            y: yc,
            denom: (sxx * syy).sqrt(),
        })
    }

    /// Coefficient of `(x_i, y_perm[i])`.
    fn eval(&self, perm: &[usize]) -> f64 {
        match self {
            Prepared::Product { x, y, denom } => {
                let dot: f64 = x.iter().zip(perm).map(|(a, &p)| a * y[p]).sum();
                (dot / denom).clamp(-1.0, 1.0)
            }
            Prepared::Concordance { x_signs, y, denom } => {
                let n = perm.len();
                let mut k = 0;
                let mut net: i64 = 0;
                for i in 0..n {
                    let yi = y[perm[i]];
                    for &pj in &perm[(i + 1)..n] {
                        net += i64::from(x_signs[k] * sign(yi - y[pj]));
                        k += 1;
                    }
                }
                (net as f64 / denom).clamp(-1.0, 1.0)
            }
        }
    }
}

fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(Prepared::new(Coefficient::Pearson, x, y)?.eval(&identity(x.len())))
}

pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(Prepared::new(Coefficient::Spearman, x, y)?.eval(&identity(x.len())))
}

pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(Prepared::new(Coefficient::Kendall, x, y)?.eval(&identity(x.len())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationConfig {
    /// Series up to this length are enumerated exhaustively.
    pub exact_max_n: usize,
    /// Permutations, including the observed order, for Monte-Carlo p-values.
    pub samples: usize,
    pub seed: u64,
    pub batch_size: usize,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            exact_max_n: 9,
            samples: 100_000,
            seed: 0,
            batch_size: 10_000,
        }
    }
}

impl PermutationConfig {
    pub fn with_seed(seed: u64) -> Self {
        PermutationConfig {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PValueMethod {
    Exact { permutations: u64 },
    MonteCarlo { permutations: u64, seed: u64 },
}

fn at_least_as_extreme(value: f64, observed: f64) -> bool {
    value.abs() >= observed.abs() - TIE_TOLERANCE
}

/// Heap's algorithm over every ordering of `0..n`.
fn exact_p_value(stat: &Prepared, observed: f64, n: usize) -> (f64, u64) {
    let mut perm = identity(n);
    let mut c = vec![0usize; n];
    let mut extreme = u64::from(at_least_as_extreme(stat.eval(&perm), observed));
    let mut total = 1u64;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += 1;
            extreme += u64::from(at_least_as_extreme(stat.eval(&perm), observed));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (extreme as f64 / total as f64, total)
}

/// The observed ordering counts as one of the `samples` permutations, so
/// the p-value lies in `[1/samples, 1]`. Batch `b` draws from stream `b + 1`.
fn monte_carlo_p_value(stat: &Prepared, observed: f64, n: usize, config: &PermutationConfig) -> f64 {
    let draws = config.samples.saturating_sub(1);
    let batch = config.batch_size.max(1);
    let batches = draws.div_ceil(batch);
    let extreme: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = SeededRng::with_stream(config.seed, b as u64 + 1);
            let mut perm = identity(n);
            let count = batch.min(draws - b * batch);
            let mut hits = 0u64;
            for _ in 0..count {
                rng.shuffle(&mut perm);
                hits += u64::from(at_least_as_extreme(stat.eval(&perm), observed));
            }
            hits
        })
        .sum();
    (extreme + 1) as f64 / (draws + 1) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignificanceBucket {
    #[serde(rename = "0.001")]
    P001,
    #[serde(rename = "0.2")]
    P02,
    #[serde(rename = "0.3")]
    P03,
    #[serde(rename = "none")]
    None,
}

impl SignificanceBucket {
    /// Smallest level the p-value clears.
    pub fn for_p_value(p: f64) -> Self {
        if p <= 0.001 {
            Self::P001
        } else if p <= 0.2 {
            Self::P02
        } else if p <= 0.3 {
            Self::P03
        } else {
            Self::None
        }
    }

    pub fn marker(self) -> &'static str {
        match self {
            Self::P001 => "***",
            Self::P02 => "†",
            Self::P03 => "‡",
            Self::None => "",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Reported,
    NoCorrelation,
}

impl Verdict {
    pub fn for_estimate(value: f64, p_value: f64) -> Self {
        if value.abs() < MIN_REPORTED_MAGNITUDE || p_value > MAX_REPORTED_P_VALUE {
            Verdict::NoCorrelation
        } else {
            Verdict::Reported
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub coefficient: Coefficient,
    pub value: f64,
    pub p_value: f64,
    pub p_value_method: PValueMethod,
    /// Student-t approximation, Pearson and Spearman only.
    pub t_approx_p_value: Option<f64>,
    pub bucket: SignificanceBucket,
    pub verdict: Verdict,
}

fn t_approx_p_value(r: f64, n: usize) -> Option<f64> {
    let df = n.checked_sub(2).filter(|&d| d > 0)? as f64;
    if r.abs() >= 1.0 {
        return Some(0.0);
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

pub fn estimate(coefficient: Coefficient, series: &PairedSeries, config: &PermutationConfig) -> Result<Estimate> {
    let n = series.len();
    let stat = Prepared::new(coefficient, &series.x, &series.y)?;
    let value = stat.eval(&identity(n));
    let (p_value, p_value_method) = if n <= config.exact_max_n {
        let (p, total) = exact_p_value(&stat, value, n);
        (p, PValueMethod::Exact { permutations: total })
    } else {
        let p = monte_carlo_p_value(&stat, value, n, config);
        (
            p,
            PValueMethod::MonteCarlo {
                permutations: config.samples.max(1) as u64,
                seed: config.seed,
            },
        )
    };
    let t_approx = match coefficient {
        Coefficient::Kendall => None,
        _ => t_approx_p_value(value, n),
    };
    Ok(Estimate {
        coefficient,
        value,
        p_value,
        p_value_method,
        t_approx_p_value: t_approx,
        bucket: SignificanceBucket::for_p_value(p_value),
        verdict: Verdict::for_estimate(value, p_value),
    })
}

pub fn pearson(series: &PairedSeries, config: &PermutationConfig) -> Result<Estimate> {
    estimate(Coefficient::Pearson, series, config)
}

pub fn spearman(series: &PairedSeries, config: &PermutationConfig) -> Result<Estimate> {
    estimate(Coefficient::Spearman, series, config)
}

pub fn kendall(series: &PairedSeries, config: &PermutationConfig) -> Result<Estimate> {
    estimate(Coefficient::Kendall, series, config)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationScope {
    General,
    PerMetric,
}

impl std::str::FromStr for CorrelationScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "per-metric" => Ok(Self::PerMetric),
            _ => Err(Error::Config(format!(
                "unknown scope `{s}`, expected general or per-metric"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub scope: CorrelationScope,
    /// Set for per-metric reports.
    pub metric: Option<Metric>,
    pub n: usize,
    pub labels: Vec<String>,
    pub pearson: Estimate,
    pub spearman: Estimate,
    pub kendall: Estimate,
}

impl CorrelationReport {
    pub fn estimate(&self, coefficient: Coefficient) -> &Estimate {
        match coefficient {
            Coefficient::Pearson => &self.pearson,
            Coefficient::Spearman => &self.spearman,
            Coefficient::Kendall => &self.kendall,
        }
    }

    pub fn row_label(&self) -> String {
        match self.metric {
            None => "General correlations".to_string(),
            Some(m) => format!("On {m}"),
        }
    }
}

fn report(
    scope: CorrelationScope,
    metric: Option<Metric>,
    series: &PairedSeries,
    config: &PermutationConfig,
) -> Result<CorrelationReport> {
    Ok(CorrelationReport {
        scope,
        metric,
        n: series.len(),
        labels: series.labels().to_vec(),
        pearson: pearson(series, config)?,
        spearman: spearman(series, config)?,
        kendall: kendall(series, config)?,
    })
}

/// Pairs the two tables on their shared (method, metric) keys, in `a`'s row order.
pub fn correlate_tables(
    a: &EvaluationTable,
    b: &EvaluationTable,
    scope: CorrelationScope,
    config: &PermutationConfig,
) -> Result<Vec<CorrelationReport>> {
    let (ka, kb) = (a.keys(), b.keys());
    if ka != kb {
        let mut offenders: Vec<String> = ka
            .difference(&kb)
            .map(|(m, k)| format!("{m} {k} (only in {})", a.label))
            .collect();
        offenders.extend(
            kb.difference(&ka)
                .map(|(m, k)| format!("{m} {k} (only in {})", b.label)),
        );
        return Err(Error::KeyMismatch(offenders));
    }
    let series_for = |metric: Option<Metric>| -> Result<PairedSeries> {
        let rows: Vec<_> = a.rows.iter().filter(|r| metric.is_none_or(|m| r.metric == m)).collect();
        let x = rows.iter().map(|r| r.mean_score).collect();
        let y = rows
            .iter()
            .map(|r| b.get(r.method, r.metric).expect("keys checked"))
            .collect();
        let labels = rows.iter().map(|r| format!("{} {}", r.method, r.metric)).collect();
        PairedSeries::new(x, y, labels)
    };
    match scope {
        CorrelationScope::General => Ok(vec![report(scope, None, &series_for(None)?, config)?]),
        CorrelationScope::PerMetric => a
            .metrics()
            .into_iter()
            .map(|m| {
                let series = series_for(Some(m)).map_err(|e| e.context(format!("metric {m}")))?;
                report(scope, Some(m), &series, config).map_err(|e| e.context(format!("metric {m}")))
            })
            .collect(),
    }
}

/// Cells are the value rounded to two decimals plus a significance marker
/// (`***` 0.001, `†` 0.2, `‡` 0.3), or `No`.
pub fn format_table(reports: &[CorrelationReport]) -> String {
    let cell = |e: &Estimate| match e.verdict {
        Verdict::NoCorrelation => "No".to_string(),
        Verdict::Reported => format!("{:.2}{}", e.value, e.bucket.marker()),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} | {:<9} | {:<9} | {:<9}",
        "Coefficient", "Pearson", "Spearman", "Kendall"
    );
    let _ = writeln!(out, "{}", "-".repeat(22 + 3 * 12));
    for r in reports {
        let _ = writeln!(
            out,
            "{:<22} | {:<9} | {:<9} | {:<9}",
            r.row_label(),
            cell(&r.pearson),
            cell(&r.spearman),
            cell(&r.kendall)
        );
    }
    out.push_str("*** / † / ‡ : significant at 0.001 / 0.2 / 0.3\n");
    out
}

/// Declared next to dataset statistics output.
pub const CITATION_WINDOW: &str =
    "citations counted from resolvable citing publications published before the present year";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatistics {
    pub researchers: usize,
    pub written_publications_per_researcher: f64,
    pub citations_per_publication: f64,
    pub references_per_publication: f64,
    pub candidate_publications: usize,
    pub relevant_publications_per_researcher: f64,
}

/// Written publications are the selected researchers' restricted-past
/// publications; per-publication means run over the distinct set of them.
/// Empty datasets yield zero means.
pub fn dataset_statistics(corpus: &Corpus, dataset: &ExperimentDataset) -> Result<DatasetStatistics> {
    let timeline = &dataset.timeline;
    let mut authored_total = 0usize;
    let mut written: BTreeSet<&str> = BTreeSet::new();
    for r in &dataset.researchers {
        let pubs = corpus.publications_of(r, timeline.restricted_past())?;
        authored_total += pubs.len();
        written.extend(pubs.iter().map(|p| p.id.as_str()));
    }
    let mut citations = 0usize;
    let mut references = 0usize;
    for id in &written {
        citations += corpus
            .citations_of(id)
            .filter(|c| corpus.publication(c).is_some_and(|p| p.year < timeline.present))
            .count();
        references += corpus.resolvable_references(id).count();
    }
    let relevant_total: usize = dataset.ground_truth.values().map(|g| g.relevant_ids.len()).sum();
    let mean = |total: usize, count: usize| if count == 0 { 0.0 } else { total as f64 / count as f64 };
    let n = dataset.researchers.len();
    Ok(DatasetStatistics {
        researchers: n,
        written_publications_per_researcher: mean(authored_total, n),
        citations_per_publication: mean(citations, written.len()),
        references_per_publication: mean(references, written.len()),
        candidate_publications: dataset.candidate_pool.len(),
        relevant_publications_per_researcher: mean(relevant_total, n),
    })
}
