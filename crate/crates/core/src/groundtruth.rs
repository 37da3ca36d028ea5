//! Temporal split, target-researcher selection and future-reference ground truth.
//!
//! The timeline is split at the present year `T0` into a restricted past
//! `[T_p, T0)` and a restricted future `[T0, T_f]`. A publication that
//! appeared before `T0` is a future reference of a researcher when the
//! researcher cites it in the restricted future but not in the restricted
//! past. Those sets are the ground truth and their union is the shared
//! candidate pool.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, YearWindow};
use crate::error::{Error, Result};
use crate::sampling::{SeededRng, SAMPLER_ALGORITHM};

pub const MANIFEST_FORMAT: &str = "refgt-dataset/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineConfig {
    /// Earliest year on the timeline (`T_s`).
    pub t_start: i32,
    /// Latest year on the timeline (`T_e`).
    pub t_end: i32,
    /// The present, `T0`.
    pub present: i32,
    /// First year of the restricted past (`T_p`).
    pub past_start: i32,
    /// Last year of the restricted future (`T_f`), inclusive.
    pub future_end: i32,
}

impl TimelineConfig {
    /// Present 2006, restricted past `[2001, 2006)`, restricted future `[2006, 2010]`.
    pub fn standard(t_start: i32, t_end: i32) -> Self {
        TimelineConfig {
            t_start,
            t_end,
            present: 2006,
            past_start: 2001,
            future_end: 2010,
        }
    }

    /// Takes `T_s` and `T_e` from the earliest and latest publication years.
    pub fn for_corpus(corpus: &Corpus, present: i32, past_start: i32, future_end: i32) -> Result<Self> {
        let (t_start, t_end) = corpus
            .year_range()
            .ok_or_else(|| Error::InvalidTimeline("corpus is empty".into()))?;
        let timeline = TimelineConfig {
            t_start,
            t_end,
            present,
            past_start,
            future_end,
        };
        timeline.validate()?;
        Ok(timeline)
    }

    pub fn validate(&self) -> Result<()> {
        let TimelineConfig {
            t_start: ts,
            t_end: te,
            present: t0,
            past_start: tp,
            future_end: tf,
        } = *self;
        if ts <= tp && tp < t0 && t0 <= tf && tf <= te {
            Ok(())
        } else {
            Err(Error::InvalidTimeline(format!(
                "need T_s <= T_p < T0 <= T_f <= T_e, got T_s={ts} T_p={tp} T0={t0} T_f={tf} T_e={te}"
            )))
        }
    }

    /// The timeline must cover every publication year in the corpus.
    pub fn validate_against(&self, corpus: &Corpus) -> Result<()> {
        self.validate()?;
        if let Some((min, max)) = corpus.year_range() {
            if min < self.t_start || max > self.t_end {
                return Err(Error::InvalidTimeline(format!(
                    "corpus spans {min}..={max}, outside timeline {}..={}",
                    self.t_start, self.t_end
                )));
            }
        }
        Ok(())
    }

    pub fn restricted_past(&self) -> YearWindow {
        YearWindow::half_open(self.past_start, self.present)
    }

    pub fn restricted_future(&self) -> YearWindow {
        YearWindow::closed(self.present, self.future_end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionCriteria {
    pub min_past_pubs: usize,
    pub max_past_pubs: Option<usize>,
    pub min_future_pubs: usize,
    pub sample_size: Option<usize>,
    pub rng_seed: u64,
    pub require_nonempty_ground_truth: bool,
    /// Only researchers with no publication before the restricted past.
    pub junior_only: bool,
    /// Fail instead of returning an empty dataset when nobody qualifies.
    pub strict: bool,
}

impl SelectionCriteria {
    /// 1 or 2 restricted-past publications, at least 5 in the restricted
    /// future, juniors only, a uniform sample of 100.
    pub fn standard(rng_seed: u64) -> Self {
        SelectionCriteria {
            min_past_pubs: 1,
            max_past_pubs: Some(2),
            min_future_pubs: 5,
            sample_size: Some(100),
            rng_seed,
            require_nonempty_ground_truth: true,
            junior_only: true,
            strict: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_past_pubs < 1 {
            return Err(Error::InvalidCriteria("min_past_pubs must be at least 1".into()));
        }
        if let Some(max) = self.max_past_pubs {
            if max < self.min_past_pubs {
                return Err(Error::InvalidCriteria(format!(
                    "max_past_pubs {max} is below min_past_pubs {}",
                    self.min_past_pubs
                )));
            }
        }
        if self.min_future_pubs < 1 {
            return Err(Error::InvalidCriteria("min_future_pubs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthSet {
    pub researcher_id: String,
    pub relevant_ids: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentDataset {
    pub timeline: TimelineConfig,
    pub criteria: SelectionCriteria,
    /// Sorted.
    pub researchers: Vec<String>,
    /// In the order the sampler drew them.
    pub sample_order: Vec<String>,
    pub ground_truth: BTreeMap<String, GroundTruthSet>,
    pub candidate_pool: BTreeSet<String>,
}

impl ExperimentDataset {
    pub fn ground_truth_of(&self, researcher_id: &str) -> Result<&GroundTruthSet> {
        self.ground_truth
            .get(researcher_id)
            .ok_or_else(|| Error::UnknownResearcher(researcher_id.to_string()))
    }

    /// Checks the pool/ground-truth relationship.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidManifest(m));
        let listed: BTreeSet<&String> = self.researchers.iter().collect();
        let keyed: BTreeSet<&String> = self.ground_truth.keys().collect();
        if listed != keyed {
            return fail("researcher list and ground-truth keys differ".into());
        }
        let union: BTreeSet<String> = build_candidate_pool(self.ground_truth.values()).into_iter().collect();
        if union != self.candidate_pool {
            return fail("candidate pool is not the union of the ground-truth sets".into());
        }
        Ok(())
    }
}

fn count_in(corpus: &Corpus, researcher_id: &str, window: YearWindow) -> Result<usize> {
    Ok(corpus.publications_of(researcher_id, window)?.len())
}

fn is_junior(corpus: &Corpus, researcher_id: &str, timeline: &TimelineConfig) -> Result<bool> {
    let before = YearWindow::half_open(i32::MIN, timeline.past_start);
    Ok(corpus.publications_of(researcher_id, before)?.is_empty())
}

/// Researchers meeting the activity thresholds, sampled if requested.
///
/// Eligible ids are sorted before sampling, so the output depends only on
/// the corpus, the criteria and the seed.
pub fn select_target_researchers(
    corpus: &Corpus,
    timeline: &TimelineConfig,
    criteria: &SelectionCriteria,
) -> Result<Vec<String>> {
    timeline.validate_against(corpus)?;
    criteria.validate()?;

    let mut eligible = Vec::new();
    for researcher in corpus.researchers() {
        let id = researcher.id.as_str();
        let past = count_in(corpus, id, timeline.restricted_past())?;
        let future = count_in(corpus, id, timeline.restricted_future())?;
        if past < criteria.min_past_pubs || criteria.max_past_pubs.is_some_and(|max| past > max) {
            continue;
        }
        if future < criteria.min_future_pubs {
            continue;
        }
        if criteria.junior_only && !is_junior(corpus, id, timeline)? {
            continue;
        }
        if criteria.require_nonempty_ground_truth
            && extract_future_references(corpus, timeline, id)?.relevant_ids.is_empty()
        {
            continue;
        }
        eligible.push(researcher.id.clone());
    }
    // BTreeMap iteration already yields sorted ids
    debug_assert!(eligible.windows(2).all(|w| w[0] < w[1]));

    if eligible.is_empty() && !criteria.strict {
        return Ok(eligible);
    }
    if eligible.is_empty() {
        return Err(Error::NoEligibleResearchers);
    }
    match criteria.sample_size {
        None => Ok(eligible),
        Some(k) if k > eligible.len() => Err(Error::SampleShortfall {
            eligible: eligible.len(),
            requested: k,
        }),
        Some(k) => {
            let mut rng = SeededRng::new(criteria.rng_seed);
            Ok(rng
                .sample(eligible.len(), k)
                .into_iter()
                .map(|i| eligible[i].clone())
                .collect())
        }
    }
}

/// Publications from before `T0` cited in the restricted future and not in
/// the restricted past. References that do not resolve have no known year
/// and are skipped.
pub fn extract_future_references(
    corpus: &Corpus,
    timeline: &TimelineConfig,
    researcher_id: &str,
) -> Result<GroundTruthSet> {
    let past = corpus.references_of(researcher_id, timeline.restricted_past())?;
    let future = corpus.references_of(researcher_id, timeline.restricted_future())?;
    let relevant_ids = future
        .difference(&past)
        .filter(|id| corpus.publication(id).is_some_and(|p| p.year < timeline.present))
        .map(|id| id.to_string())
        .collect();
    Ok(GroundTruthSet {
        researcher_id: researcher_id.to_string(),
        relevant_ids,
    })
}

pub fn build_candidate_pool<'a>(ground_truth_sets: impl IntoIterator<Item = &'a GroundTruthSet>) -> BTreeSet<String> {
    ground_truth_sets
        .into_iter()
        .flat_map(|gt| gt.relevant_ids.iter().cloned())
        .collect()
}

pub fn build_experiment_dataset(
    corpus: &Corpus,
    timeline: &TimelineConfig,
    criteria: &SelectionCriteria,
) -> Result<ExperimentDataset> {
    let sample_order = select_target_researchers(corpus, timeline, criteria)?;
    let mut researchers = sample_order.clone();
    researchers.sort();

    let sets = researchers
        .par_iter()
        .map(|id| extract_future_references(corpus, timeline, id))
        .collect::<Result<Vec<_>>>()?;
    let candidate_pool = build_candidate_pool(&sets);
    let ground_truth = sets.into_iter().map(|gt| (gt.researcher_id.clone(), gt)).collect();

    Ok(ExperimentDataset {
        timeline: *timeline,
        criteria: criteria.clone(),
        researchers,
        sample_order,
        ground_truth,
        candidate_pool,
    })
}

/// On-disk form of an [`ExperimentDataset`]; the hand-off between
/// `build-gt` and the later pipeline stages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub sampler: String,
    pub timeline: TimelineConfig,
    pub criteria: SelectionCriteria,
    pub researchers: Vec<String>,
    pub sample_order: Vec<String>,
    pub ground_truth: BTreeMap<String, Vec<String>>,
    pub candidate_pool: Vec<String>,
}

impl From<&ExperimentDataset> for DatasetManifest {
    fn from(dataset: &ExperimentDataset) -> Self {
        DatasetManifest {
            format: MANIFEST_FORMAT.to_string(),
            sampler: SAMPLER_ALGORITHM.to_string(),
            timeline: dataset.timeline,
            criteria: dataset.criteria.clone(),
            researchers: dataset.researchers.clone(),
            sample_order: dataset.sample_order.clone(),
            ground_truth: dataset
                .ground_truth
                .iter()
                .map(|(id, gt)| (id.clone(), gt.relevant_ids.iter().cloned().collect()))
                .collect(),
            candidate_pool: dataset.candidate_pool.iter().cloned().collect(),
        }
    }
}

impl DatasetManifest {
    pub fn into_dataset(self) -> Result<ExperimentDataset> {
        if self.format != MANIFEST_FORMAT {
            return Err(Error::InvalidManifest(format!(
                "unsupported format `{}`, expected `{MANIFEST_FORMAT}`",
                self.format
            )));
        }
        self.timeline.validate()?;
        let mut researchers = self.researchers;
        researchers.sort();
        let dataset = ExperimentDataset {
            timeline: self.timeline,
            criteria: self.criteria,
            researchers,
            sample_order: self.sample_order,
            ground_truth: self
                .ground_truth
                .into_iter()
                .map(|(id, ids)| {
                    let gt = GroundTruthSet {
                        researcher_id: id.clone(),
                        relevant_ids: ids.into_iter().collect(),
                    };
                    (id, gt)
                })
                .collect(),
            candidate_pool: self.candidate_pool.into_iter().collect(),
        };
        dataset.validate()?;
        Ok(dataset)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}
