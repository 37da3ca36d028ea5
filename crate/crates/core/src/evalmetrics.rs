//! NDCG@k, reciprocal rank and per-method evaluation tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbf::{past_cited, rank_by_vector, CbfMethod, FeatureScheme, FeatureSpace};
use crate::error::{Error, Result};
use crate::groundtruth::ExperimentDataset;
use crate::textvec::SparseVector;

/// Declared alongside evaluation output; tables are comparable only under the same variant.
pub const NDCG_VARIANT: &str =
    "binary gain rel/log2(i+1); IDCG over min(k, |ground truth|) ideal positions; MRR over the full ranking";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Ndcg(usize),
    Mrr,
}

impl Metric {
    pub fn standard_set() -> Vec<Metric> {
        vec![Metric::Ndcg(5), Metric::Ndcg(10), Metric::Mrr]
    }

    pub fn score(self, ranking: &[&str], relevant: &BTreeSet<String>) -> Result<f64> {
        match self {
            Metric::Ndcg(k) => ndcg_at_k(ranking, relevant, k),
            Metric::Mrr => reciprocal_rank(ranking, relevant),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Ndcg(k) => write!(f, "NDCG@{k}"),
            Metric::Mrr => f.write_str("MRR"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        if upper == "MRR" || upper == "RR" {
            return Ok(Metric::Mrr);
        }
        match upper.strip_prefix("NDCG@").map(str::parse::<usize>) {
            Some(Ok(k)) if k >= 1 => Ok(Metric::Ndcg(k)),
            _ => Err(Error::Config(format!("unknown metric `{s}`"))),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

fn discount(position: usize) -> f64 {
    1.0 / ((position + 1) as f64).log2()
}

/// Binary-relevance NDCG over the first `k` positions (1-based positions).
pub fn ndcg_at_k(ranking: &[&str], relevant: &BTreeSet<String>, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::UndefinedMetric("NDCG@0".into()));
    }
    if relevant.is_empty() {
        return Err(Error::UndefinedMetric("NDCG with empty ground truth".into()));
    }
    let dcg: f64 = ranking
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, id)| relevant.contains(**id))
        .map(|(i, _)| discount(i + 1))
        .sum();
    let ideal: f64 = (1..=k.min(relevant.len())).map(discount).sum();
    Ok(dcg / ideal)
}

/// `1 / rank` of the first relevant item, 0 if none appears.
pub fn reciprocal_rank(ranking: &[&str], relevant: &BTreeSet<String>) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::UndefinedMetric("reciprocal rank with empty ground truth".into()));
    }
    Ok(ranking
        .iter()
        .position(|id| relevant.contains(*id))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub method: CbfMethod,
    pub metric: Metric,
    pub mean_score: f64,
    pub n_researchers: usize,
}

/// Mean score per (method, metric), metric-major in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationTable {
    pub label: String,
    pub n_researchers: usize,
    pub rows: Vec<EvaluationRow>,
}

impl EvaluationTable {
    pub fn get(&self, method: CbfMethod, metric: Metric) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.metric == metric)
            .map(|r| r.mean_score)
    }

    pub fn keys(&self) -> BTreeSet<(CbfMethod, Metric)> {
        self.rows.iter().map(|r| (r.method, r.metric)).collect()
    }

    /// Distinct metrics in first-appearance order.
    pub fn metrics(&self) -> Vec<Metric> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.metric) {
                seen.push(r.metric);
            }
        }
        seen
    }

    /// `method,metric,mean_score,n_researchers` with six-decimal scores.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Config(format!("writing evaluation table: {e}"));
        writer
            .write_record(["method", "metric", "mean_score", "n_researchers"])
            .map_err(to_err)?;
        for r in &self.rows {
            writer
                .write_record([
                    r.method.to_string(),
                    r.metric.to_string(),
                    format!("{:.6}", r.mean_score),
                    r.n_researchers.to_string(),
                ])
                .map_err(to_err)?;
        }
        writer
            .flush()
            .map_err(|e| Error::Config(format!("writing evaluation table: {e}")))
    }

    pub fn read_csv<R: Read>(label: impl Into<String>, input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let mut rows: Vec<EvaluationRow> = Vec::new();
        for (i, record) in reader.deserialize().enumerate() {
            let row: EvaluationRow = record.map_err(|e| Error::Parse {
                // header is line 1
                line: i + 2,
                message: e.to_string(),
            })?;
            if !(0.0..=1.0).contains(&row.mean_score) {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("score {} outside [0, 1]", row.mean_score),
                });
            }
            if rows.iter().any(|r| r.method == row.method && r.metric == row.metric) {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("duplicate row {} {}", row.method, row.metric),
                });
            }
            rows.push(row);
        }
        let n_researchers = rows.first().map_or(0, |r| r.n_researchers);
        Ok(EvaluationTable {
            label: label.into(),
            n_researchers,
            rows,
        })
    }
}

/// One researcher's scores, indexed `[method][metric]`.
pub type ResearcherScores = (String, Vec<Vec<f64>>);

/// Scores every selected researcher under every method. Output follows
/// the dataset's sorted researcher order whatever the thread schedule.
pub fn evaluate_per_researcher(
    space: &FeatureSpace<'_>,
    dataset: &ExperimentDataset,
    methods: &[CbfMethod],
    metrics: &[Metric],
    exclude_past_cited: bool,
) -> Result<Vec<ResearcherScores>> {
    if methods.is_empty() {
        return Err(Error::Config("no CBF methods selected".into()));
    }
    if metrics.is_empty() {
        return Err(Error::Config("no metrics selected".into()));
    }
    let mut candidates: BTreeMap<FeatureScheme, Vec<(String, SparseVector)>> = BTreeMap::new();
    for m in methods {
        if let std::collections::btree_map::Entry::Vacant(slot) = candidates.entry(m.publication) {
            slot.insert(space.candidate_features(dataset, m.publication)?);
        }
    }
    let timeline = &dataset.timeline;

    dataset
        .researchers
        .par_iter()
        .map(|researcher| {
            let relevant = &dataset.ground_truth_of(researcher)?.relevant_ids;
            let excluded = if exclude_past_cited {
                past_cited(space.corpus(), researcher, timeline)?
            } else {
                BTreeSet::new()
            };
            let mut profiles: BTreeMap<FeatureScheme, SparseVector> = BTreeMap::new();
            let mut per_method = Vec::with_capacity(methods.len());
            for m in methods {
                if let std::collections::btree_map::Entry::Vacant(slot) = profiles.entry(m.researcher) {
                    slot.insert(space.researcher_feature(researcher, timeline, m.researcher)?);
                }
                let list = rank_by_vector(
                    researcher,
                    &candidates[&m.publication],
                    &profiles[&m.researcher],
                    &excluded,
                );
                let ids = list.ids();
                per_method.push(
                    metrics
                        .iter()
                        .map(|metric| metric.score(&ids, relevant))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            Ok((researcher.clone(), per_method))
        })
        .collect()
}

pub fn evaluate_methods(
    space: &FeatureSpace<'_>,
    dataset: &ExperimentDataset,
    methods: &[CbfMethod],
    metrics: &[Metric],
    exclude_past_cited: bool,
    label: impl Into<String>,
) -> Result<EvaluationTable> {
    let scores = evaluate_per_researcher(space, dataset, methods, metrics, exclude_past_cited)?;
    table_from_scores(label, methods, metrics, &scores)
}

/// Means over researchers, summed in the given (sorted) researcher order.
pub fn table_from_scores(
    label: impl Into<String>,
    methods: &[CbfMethod],
    metrics: &[Metric],
    scores: &[ResearcherScores],
) -> Result<EvaluationTable> {
    if scores.is_empty() {
        return Err(Error::UndefinedMetric("mean over zero researchers".into()));
    }
    let n = scores.len();
    let mut rows = Vec::with_capacity(methods.len() * metrics.len());
    for (mi, &metric) in metrics.iter().enumerate() {
        for (ki, &method) in methods.iter().enumerate() {
            let total: f64 = scores.iter().map(|(_, s)| s[ki][mi]).sum();
            rows.push(EvaluationRow {
                method,
                metric,
                mean_score: total / n as f64,
                n_researchers: n,
            });
        }
    }
    Ok(EvaluationTable {
        label: label.into(),
        n_researchers: n,
        rows,
    })
}
