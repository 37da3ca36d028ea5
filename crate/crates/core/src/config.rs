//! Experiment configuration (TOML).
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every stage reads the same file; command-line flags override
//! individual values.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::cbf::CbfMethod;
use crate::corpus::{ContentFields, Corpus, DanglingPolicy, IngestOptions};
use crate::error::{Error, Result};
use crate::evalmetrics::Metric;
use crate::groundtruth::{SelectionCriteria, TimelineConfig};
use crate::statcorr::PermutationConfig;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker cap; all cores when unset.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub ingest: IngestSection,
    #[serde(default)]
    pub timeline: TimelineSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub seeds: Seeds,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    #[serde(default)]
    pub dangling: DanglingPolicy,
}

/// `t_start`/`t_end` default to the corpus year range.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelineSection {
    pub t_start: Option<i32>,
    pub t_end: Option<i32>,
    pub present: i32,
    pub past_start: i32,
    pub future_end: i32,
}

impl Default for TimelineSection {
    fn default() -> Self {
        let p = TimelineConfig::standard(0, 0);
        TimelineSection {
            t_start: None,
            t_end: None,
            present: p.present,
            past_start: p.past_start,
            future_end: p.future_end,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum SampleSize {
    Count(usize),
    /// The string `"all"`: keep every eligible researcher.
    All(AllMarker),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllMarker {
    All,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSection {
    pub min_past_pubs: usize,
    pub max_past_pubs: Option<usize>,
    pub min_future_pubs: usize,
    pub sample_size: SampleSize,
    pub require_nonempty_ground_truth: bool,
    pub junior_only: bool,
    pub strict: bool,
}

impl Default for SelectionSection {
    fn default() -> Self {
        let p = SelectionCriteria::standard(0);
        SelectionSection {
            min_past_pubs: p.min_past_pubs,
            max_past_pubs: p.max_past_pubs,
            min_future_pubs: p.min_future_pubs,
            sample_size: SampleSize::Count(p.sample_size.unwrap_or(100)),
            require_nonempty_ground_truth: p.require_nonempty_ground_truth,
            junior_only: p.junior_only,
            strict: p.strict,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodProfile {
    /// {F1..F4} x {F1, F2}
    #[default]
    Comparable,
    /// All sixteen combinations.
    All,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub profile: MethodProfile,
    /// Overrides `profile` when present.
    pub methods: Option<Vec<CbfMethod>>,
    pub metrics: Vec<Metric>,
    pub exclude_past_cited: bool,
    pub stopwords: Option<PathBuf>,
    pub content_fields: ContentFields,
    pub write_rankings: bool,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            profile: MethodProfile::Comparable,
            methods: None,
            metrics: Metric::standard_set(),
            exclude_past_cited: false,
            stopwords: None,
            content_fields: ContentFields::TitleAbstract,
            write_rankings: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub sampling: u64,
    pub permutation: u64,
}

impl ExperimentConfig {
    /// Every section at its default.
    pub fn with_corpus(corpus: PathBuf) -> Self {
        ExperimentConfig {
            corpus,
            output_dir: default_output_dir(),
            threads: None,
            ingest: IngestSection::default(),
            timeline: TimelineSection::default(),
            selection: SelectionSection::default(),
            evaluation: EvaluationSection::default(),
            seeds: Seeds::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.corpus = base.join(&config.corpus);
        config.output_dir = base.join(&config.output_dir);
        if let Some(s) = &config.evaluation.stopwords {
            config.evaluation.stopwords = Some(base.join(s));
        }
        config.validate()?;
        Ok(config)
    }

    /// Checks everything that does not need the corpus.
    pub fn validate(&self) -> Result<()> {
        self.criteria().validate()?;
        let t = &self.timeline;
        if !(t.past_start < t.present && t.present <= t.future_end) {
            return Err(Error::InvalidTimeline(format!(
                "need past_start < present <= future_end, got {} / {} / {}",
                t.past_start, t.present, t.future_end
            )));
        }
        if self.methods().is_empty() {
            return Err(Error::Config("evaluation.methods is empty".into()));
        }
        if self.evaluation.metrics.is_empty() {
            return Err(Error::Config("evaluation.metrics is empty".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            dangling: self.ingest.dangling,
        }
    }

    pub fn timeline_for(&self, corpus: &Corpus) -> Result<TimelineConfig> {
        let t = &self.timeline;
        let (min, max) = corpus.year_range().unwrap_or((t.past_start, t.future_end));
        let timeline = TimelineConfig {
            t_start: t.t_start.unwrap_or(min),
            t_end: t.t_end.unwrap_or(max),
            present: t.present,
            past_start: t.past_start,
            future_end: t.future_end,
        };
        timeline.validate_against(corpus)?;
        Ok(timeline)
    }

    pub fn criteria(&self) -> SelectionCriteria {
        let s = &self.selection;
        SelectionCriteria {
            min_past_pubs: s.min_past_pubs,
            max_past_pubs: s.max_past_pubs,
            min_future_pubs: s.min_future_pubs,
            sample_size: match s.sample_size {
                SampleSize::Count(k) => Some(k),
                SampleSize::All(_) => None,
            },
            rng_seed: self.seeds.sampling,
            require_nonempty_ground_truth: s.require_nonempty_ground_truth,
            junior_only: s.junior_only,
            strict: s.strict,
        }
    }

    pub fn methods(&self) -> Vec<CbfMethod> {
        match (&self.evaluation.methods, self.evaluation.profile) {
            (Some(m), _) => m.clone(),
            (None, MethodProfile::Comparable) => CbfMethod::comparable_subset(),
            (None, MethodProfile::All) => CbfMethod::all(),
        }
    }

    pub fn permutation(&self) -> PermutationConfig {
        PermutationConfig::with_seed(self.seeds.permutation)
    }
}
