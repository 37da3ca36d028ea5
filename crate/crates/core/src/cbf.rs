//! Content-based filtering: feature vectors, cosine scoring and ranking.
//!
//! A publication's feature vector is its own tf-idf vector, optionally
//! summed with the vectors of the publications it references (F2), the
//! publications citing it (F3), or both (F4). A researcher's vector is the
//! sum of the feature vectors of their restricted-past publications. Only
//! neighbours published before the present contribute.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ContentFields, Corpus};
use crate::error::{Error, Result};
use crate::groundtruth::{ExperimentDataset, TimelineConfig};
use crate::textvec::{SparseVector, Tokenizer, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureScheme {
    F1,
    F2,
    F3,
    F4,
}

impl FeatureScheme {
    pub const ALL: [FeatureScheme; 4] = [Self::F1, Self::F2, Self::F3, Self::F4];

    pub fn uses_references(self) -> bool {
        matches!(self, Self::F2 | Self::F4)
    }

    pub fn uses_citations(self) -> bool {
        matches!(self, Self::F3 | Self::F4)
    }
}

impl fmt::Display for FeatureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FeatureScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F1" => Ok(Self::F1),
            "F2" => Ok(Self::F2),
            "F3" => Ok(Self::F3),
            "F4" => Ok(Self::F4),
            _ => Err(Error::Config(format!("unknown feature scheme `{s}`"))),
        }
    }
}

/// A (publication scheme, researcher scheme) pairing. Written `F2xF1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CbfMethod {
    pub publication: FeatureScheme,
    pub researcher: FeatureScheme,
}

impl CbfMethod {
    pub fn new(publication: FeatureScheme, researcher: FeatureScheme) -> Self {
        CbfMethod {
            publication,
            researcher,
        }
    }

    /// All 16 combinations, publication scheme major.
    pub fn all() -> Vec<CbfMethod> {
        Self::with_researcher_schemes(&FeatureScheme::ALL)
    }

    /// Every publication scheme against researcher schemes F1 and F2.
    pub fn comparable_subset() -> Vec<CbfMethod> {
        Self::with_researcher_schemes(&[FeatureScheme::F1, FeatureScheme::F2])
    }

    fn with_researcher_schemes(researcher: &[FeatureScheme]) -> Vec<CbfMethod> {
        FeatureScheme::ALL
            .iter()
            .flat_map(|&p| researcher.iter().map(move |&r| CbfMethod::new(p, r)))
            .collect()
    }
}

impl fmt::Display for CbfMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.publication, self.researcher)
    }
}

impl FromStr for CbfMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, r) = s
            .split_once(['x', 'X', '×'])
            .ok_or_else(|| Error::Config(format!("method `{s}` is not of the form F1xF2")))?;
        Ok(CbfMethod::new(p.parse()?, r.parse()?))
    }
}

impl Serialize for CbfMethod {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CbfMethod {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `dot(a, b) / (|a| |b|)`, or 0 when either vector is zero.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).clamp(-1.0, 1.0)
}

/// Content vectors over one shared vocabulary.
pub struct FeatureSpace<'a> {
    corpus: &'a Corpus,
    vocabulary: Vocabulary,
    tokenizer: Tokenizer,
    fields: ContentFields,
    vectors: HashMap<String, SparseVector>,
}

impl<'a> FeatureSpace<'a> {
    /// The idf document set is every publication a feature sum can touch:
    /// the candidate pool, the researchers' restricted-past publications,
    /// and their pre-present references and citations.
    pub fn for_dataset(
        corpus: &'a Corpus,
        dataset: &ExperimentDataset,
        tokenizer: Tokenizer,
        fields: ContentFields,
    ) -> Result<Self> {
        let timeline = &dataset.timeline;
        let mut roots: BTreeSet<&str> = dataset.candidate_pool.iter().map(String::as_str).collect();
        for r in &dataset.researchers {
            for p in corpus.publications_of(r, timeline.restricted_past())? {
                roots.insert(&p.id);
            }
        }
        let mut documents = roots.clone();
        for id in roots {
            documents.extend(neighbours(corpus, id, FeatureScheme::F4, timeline.present));
        }
        Self::from_documents(corpus, documents, tokenizer, fields)
    }

    pub fn from_documents<'i>(
        corpus: &'a Corpus,
        ids: impl IntoIterator<Item = &'i str>,
        tokenizer: Tokenizer,
        fields: ContentFields,
    ) -> Result<Self> {
        let mut tokens = Vec::new();
        let unique: BTreeSet<&str> = ids.into_iter().collect();
        for id in unique {
            let p = corpus
                .publication(id)
                .ok_or_else(|| Error::UnknownPublication(id.to_string()))?;
            tokens.push((id.to_string(), tokenizer.tokenize(&p.content(fields))));
        }
        let vocabulary = Vocabulary::build(tokens.iter().map(|(_, t)| t))?;
        let vectors = tokens
            .iter()
            .map(|(id, t)| (id.clone(), vocabulary.tfidf_vector(t)))
            .collect();
        Ok(FeatureSpace {
            corpus,
            vocabulary,
            tokenizer,
            fields,
            vectors,
        })
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// `V_p`. Publications outside the document set are vectorized on demand.
    pub fn content_vector(&self, id: &str) -> Result<SparseVector> {
        if let Some(v) = self.vectors.get(id) {
            return Ok(v.clone());
        }
        let p = self
            .corpus
            .publication(id)
            .ok_or_else(|| Error::UnknownPublication(id.to_string()))?;
        Ok(self
            .vocabulary
            .tfidf_vector(&self.tokenizer.tokenize(&p.content(self.fields))))
    }

    pub fn publication_feature(&self, id: &str, scheme: FeatureScheme, time_cutoff: i32) -> Result<SparseVector> {
        let mut feature = self.content_vector(id)?;
        for n in neighbours(self.corpus, id, scheme, time_cutoff) {
            feature += &self.content_vector(n)?;
        }
        Ok(feature)
    }

    /// Sum of the researcher's restricted-past publication features, cut off at `T0`.
    pub fn researcher_feature(
        &self,
        researcher_id: &str,
        timeline: &TimelineConfig,
        scheme: FeatureScheme,
    ) -> Result<SparseVector> {
        let past = self.corpus.publications_of(researcher_id, timeline.restricted_past())?;
        if past.is_empty() {
            return Err(Error::NoPastPublications(researcher_id.to_string()));
        }
        let mut sum = SparseVector::new();
        for p in past {
            sum += &self.publication_feature(&p.id, scheme, timeline.present)?;
        }
        Ok(sum)
    }

    pub fn candidate_features(
        &self,
        dataset: &ExperimentDataset,
        scheme: FeatureScheme,
    ) -> Result<Vec<(String, SparseVector)>> {
        dataset
            .candidate_pool
            .iter()
            .map(|id| {
                Ok((
                    id.clone(),
                    self.publication_feature(id, scheme, dataset.timeline.present)?,
                ))
            })
            .collect()
    }
}

/// Resolvable references and/or citations of `id` published before `time_cutoff`.
/// A publication both referenced and citing (a cycle) appears in each sum.
fn neighbours<'c>(corpus: &'c Corpus, id: &str, scheme: FeatureScheme, time_cutoff: i32) -> Vec<&'c str> {
    let before = |n: &&str| corpus.publication(n).is_some_and(|p| p.year < time_cutoff);
    let mut out = Vec::new();
    if scheme.uses_references() {
        out.extend(corpus.resolvable_references(id).filter(before));
    }
    if scheme.uses_citations() {
        out.extend(corpus.citations_of(id).filter(before));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedEntry {
    pub publication_id: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedList {
    pub researcher_id: String,
    /// Descending score, ties by ascending id.
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.publication_id.as_str()).collect()
    }
}

pub fn rank_by_vector(
    researcher_id: &str,
    candidates: &[(String, SparseVector)],
    researcher_vector: &SparseVector,
    excluded: &BTreeSet<&str>,
) -> RankedList {
    let mut entries: Vec<RankedEntry> = candidates
        .iter()
        .filter(|(id, _)| !excluded.contains(id.as_str()))
        .map(|(id, v)| RankedEntry {
            publication_id: id.clone(),
            score: cosine(v, researcher_vector),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.publication_id.cmp(&b.publication_id))
    });
    RankedList {
        researcher_id: researcher_id.to_string(),
        entries,
    }
}

/// Publications the researcher cited in the restricted past.
pub fn past_cited<'c>(corpus: &'c Corpus, researcher_id: &str, timeline: &TimelineConfig) -> Result<BTreeSet<&'c str>> {
    corpus.references_of(researcher_id, timeline.restricted_past())
}

pub fn rank_candidates(
    space: &FeatureSpace<'_>,
    dataset: &ExperimentDataset,
    researcher_id: &str,
    method: CbfMethod,
    exclude_past_cited: bool,
) -> Result<RankedList> {
    if dataset
        .researchers
        .binary_search_by(|r| r.as_str().cmp(researcher_id))
        .is_err()
    {
        return Err(Error::UnknownResearcher(researcher_id.to_string()));
    }
    let candidates = space.candidate_features(dataset, method.publication)?;
    let researcher = space.researcher_feature(researcher_id, &dataset.timeline, method.researcher)?;
    let excluded = if exclude_past_cited {
        past_cited(space.corpus(), researcher_id, &dataset.timeline)?
    } else {
        BTreeSet::new()
    };
    Ok(rank_by_vector(researcher_id, &candidates, &researcher, &excluded))
}

/// `researcher_id,rank,publication_id,score` with 1-based ranks.
pub fn write_rankings_csv<W: Write>(lists: &[RankedList], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Config(format!("writing rankings: {e}"));
    writer
        .write_record(["researcher_id", "rank", "publication_id", "score"])
        .map_err(to_err)?;
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            writer
                .write_record([
                    list.researcher_id.as_str(),
                    &(i + 1).to_string(),
                    &e.publication_id,
                    &format!("{:.6}", e.score),
                ])
                .map_err(to_err)?;
        }
    }
    writer
        .flush()
        .map_err(|e| Error::Config(format!("writing rankings: {e}")))
}
