//! Bibliographic corpus ingestion and lookup.
//!
//! A corpus is read from JSONL, one publication per line. Researchers are
//! derived from the `authors` field and the citation index is the inverse
//! of the resolvable reference edges. Author ids are taken as already
//! disambiguated identities.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 3000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Publication {
    pub id: String,
    pub year: i32,
    pub title: String,
    pub abstract_text: String,
    pub author_ids: BTreeSet<String>,
    pub reference_ids: BTreeSet<String>,
}

impl Publication {
    /// Text fed to the vectorizer.
    pub fn content(&self, fields: ContentFields) -> String {
        match fields {
            ContentFields::Title => self.title.clone(),
            ContentFields::TitleAbstract if self.abstract_text.is_empty() => self.title.clone(),
            ContentFields::TitleAbstract => format!("{} {}", self.title, self.abstract_text),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentFields {
    #[default]
    TitleAbstract,
    Title,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Researcher {
    pub id: String,
    pub publication_ids: BTreeSet<String>,
}

/// What to do with a reference whose target is not in the corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DanglingPolicy {
    #[default]
    Drop,
    Keep,
    Error,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IngestOptions {
    pub dangling: DanglingPolicy,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub publications: usize,
    pub researchers: usize,
    /// Resolvable reference edges after policy application.
    pub reference_edges: usize,
    pub dropped_edges: usize,
    /// Dangling edges retained under `DanglingPolicy::Keep`.
    pub kept_dangling_edges: usize,
    pub self_references_dropped: usize,
    pub min_year: Option<i32>,
    pub max_year: Option<i32>,
}

#[derive(Debug, Deserialize)]
struct Record {
    id: String,
    year: i32,
    title: String,
    #[serde(default)]
    r#abstract: String,
    authors: Vec<String>,
    #[serde(default)]
    references: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// `[start, end)`
    HalfOpen,
    /// `[start, end]`
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
    pub kind: WindowKind,
}

impl YearWindow {
    pub fn half_open(start: i32, end: i32) -> Self {
        YearWindow {
            start,
            end,
            kind: WindowKind::HalfOpen,
        }
    }

    pub fn closed(start: i32, end: i32) -> Self {
        YearWindow {
            start,
            end,
            kind: WindowKind::Closed,
        }
    }

    pub fn contains(&self, year: i32) -> bool {
        match self.kind {
            WindowKind::HalfOpen => self.start <= year && year < self.end,
            WindowKind::Closed => self.start <= year && year <= self.end,
        }
    }
}

/// Immutable publication index. Safe to share across threads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    publications: BTreeMap<String, Publication>,
    researchers: BTreeMap<String, Researcher>,
    citation_index: BTreeMap<String, BTreeSet<String>>,
}

impl Corpus {
    /// Reads a JSONL stream. Blank lines are skipped; line numbers are 1-based.
    pub fn ingest<R: BufRead>(source: R, options: IngestOptions) -> Result<(Corpus, IngestReport)> {
        let mut lines_of = BTreeMap::new();
        let mut publications = BTreeMap::new();
        let mut report = IngestReport::default();

        for (index, line) in source.lines().enumerate() {
            let line_no = index + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if !(MIN_YEAR..=MAX_YEAR).contains(&record.year) {
                return Err(Error::YearOutOfRange {
                    line: line_no,
                    id: record.id,
                    year: record.year,
                    min: MIN_YEAR,
                    max: MAX_YEAR,
                });
            }
            if publications.contains_key(&record.id) {
                return Err(Error::DuplicatePublication {
                    line: line_no,
                    id: record.id,
                });
            }
            let mut reference_ids: BTreeSet<String> = record.references.into_iter().collect();
            if reference_ids.remove(&record.id) {
                report.self_references_dropped += 1;
            }
            let publication = Publication {
                id: record.id.clone(),
                year: record.year,
                title: record.title,
                abstract_text: record.r#abstract,
                author_ids: record.authors.into_iter().collect(),
                reference_ids,
            };
            lines_of.insert(record.id.clone(), line_no);
            publications.insert(record.id, publication);
        }

        // second pass: references may point forward in the stream
        let known: BTreeSet<String> = publications.keys().cloned().collect();
        for publication in publications.values_mut() {
            let dangling: Vec<String> = publication
                .reference_ids
                .iter()
                .filter(|r| !known.contains(*r))
                .cloned()
                .collect();
            if dangling.is_empty() {
                continue;
            }
            match options.dangling {
                DanglingPolicy::Drop => {
                    report.dropped_edges += dangling.len();
                    for r in &dangling {
                        publication.reference_ids.remove(r);
                    }
                }
                DanglingPolicy::Keep => report.kept_dangling_edges += dangling.len(),
                DanglingPolicy::Error => {
                    return Err(Error::DanglingReference {
                        line: lines_of[&publication.id],
                        id: publication.id.clone(),
                        reference: dangling[0].clone(),
                    })
                }
            }
        }

        let corpus = Corpus::from_publications(publications);
        report.publications = corpus.publications.len();
        report.researchers = corpus.researchers.len();
        report.reference_edges = corpus.citation_index.values().map(BTreeSet::len).sum();
        report.min_year = corpus.publications.values().map(|p| p.year).min();
        report.max_year = corpus.publications.values().map(|p| p.year).max();
        Ok((corpus, report))
    }

    fn from_publications(publications: BTreeMap<String, Publication>) -> Corpus {
        let mut researchers: BTreeMap<String, Researcher> = BTreeMap::new();
        let mut citation_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for publication in publications.values() {
            for author in &publication.author_ids {
                researchers
                    .entry(author.clone())
                    .or_insert_with(|| Researcher {
                        id: author.clone(),
                        publication_ids: BTreeSet::new(),
                    })
                    .publication_ids
                    .insert(publication.id.clone());
            }
            for reference in &publication.reference_ids {
                if publications.contains_key(reference) {
                    citation_index
                        .entry(reference.clone())
                        .or_default()
                        .insert(publication.id.clone());
                }
            }
        }
        Corpus {
            publications,
            researchers,
            citation_index,
        }
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn publication(&self, id: &str) -> Option<&Publication> {
        self.publications.get(id)
    }

    pub fn publications(&self) -> impl Iterator<Item = &Publication> {
        self.publications.values()
    }

    pub fn researcher(&self, id: &str) -> Option<&Researcher> {
        self.researchers.get(id)
    }

    pub fn researchers(&self) -> impl Iterator<Item = &Researcher> {
        self.researchers.values()
    }

    /// Ids of publications citing `id`. Empty if none or unknown.
    pub fn citations_of(&self, id: &str) -> impl Iterator<Item = &str> {
        self.citation_index
            .get(id)
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    /// Reference targets of `id` that resolve in the corpus.
    pub fn resolvable_references(&self, id: &str) -> impl Iterator<Item = &str> {
        self.publications
            .get(id)
            .into_iter()
            .flat_map(|p| p.reference_ids.iter())
            .filter(|r| self.publications.contains_key(*r))
            .map(String::as_str)
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.publications.values().map(|p| p.year).min()?;
        let max = self.publications.values().map(|p| p.year).max()?;
        Some((min, max))
    }

    pub fn publications_of(&self, researcher_id: &str, window: YearWindow) -> Result<Vec<&Publication>> {
        let researcher = self
            .researchers
            .get(researcher_id)
            .ok_or_else(|| Error::UnknownResearcher(researcher_id.to_string()))?;
        Ok(researcher
            .publication_ids
            .iter()
            .filter_map(|id| self.publications.get(id))
            .filter(|p| window.contains(p.year))
            .collect())
    }

    /// Union of the reference ids of the researcher's publications inside `window`.
    pub fn references_of(&self, researcher_id: &str, window: YearWindow) -> Result<BTreeSet<&str>> {
        Ok(self
            .publications_of(researcher_id, window)?
            .into_iter()
            .flat_map(|p| p.reference_ids.iter().map(String::as_str))
            .collect())
    }

    /// All (citing, cited) pairs recovered from the citation index.
    pub fn citation_edges(&self) -> BTreeSet<(&str, &str)> {
        self.citation_index
            .iter()
            .flat_map(|(cited, citing)| citing.iter().map(move |c| (c.as_str(), cited.as_str())))
            .collect()
    }
}
