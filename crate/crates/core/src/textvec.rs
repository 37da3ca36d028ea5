//! Tokenization and tf-idf sparse vectors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::{Add, AddAssign, Sub};
use std::path::Path;

use crate::error::{Error, Result};

/// Sorted `(term id, weight)` pairs with no explicit zeros.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Duplicate ids are summed; zeros are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut merged: BTreeMap<u32, f64> = BTreeMap::new();
        for (id, w) in pairs {
            *merged.entry(id).or_insert(0.0) += w;
        }
        SparseVector {
            entries: merged.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: u32) -> f64 {
        self.entries
            .binary_search_by_key(&term, |&(id, _)| id)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> SparseVector {
        SparseVector::from_pairs(self.iter().map(|(id, w)| (id, w * factor)))
    }

    fn merge(&self, other: &SparseVector, sign: f64) -> SparseVector {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() || j < b.len() {
            let (id, w) = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                a[i - 1]
            } else if i == a.len() || b[j].0 < a[i].0 {
                j += 1;
                (b[j - 1].0, sign * b[j - 1].1)
            } else {
                i += 1;
                j += 1;
                (a[i - 1].0, a[i - 1].1 + sign * b[j - 1].1)
            };
            if w != 0.0 {
                out.push((id, w));
            }
        }
        SparseVector { entries: out }
    }
}

impl Add for &SparseVector {
    type Output = SparseVector;

    fn add(self, rhs: &SparseVector) -> SparseVector {
        self.merge(rhs, 1.0)
    }
}

impl Sub for &SparseVector {
    type Output = SparseVector;

    fn sub(self, rhs: &SparseVector) -> SparseVector {
        self.merge(rhs, -1.0)
    }
}

impl AddAssign<&SparseVector> for SparseVector {
    fn add_assign(&mut self, rhs: &SparseVector) {
        *self = self.merge(rhs, 1.0);
    }
}

#[derive(Clone, Debug, Default)]
pub struct Tokenizer {
    stopwords: Option<HashSet<String>>,
}

impl Tokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_stopwords(stopwords: impl IntoIterator<Item = String>) -> Self {
        Tokenizer {
            stopwords: Some(stopwords.into_iter().map(|w| w.to_lowercase()).collect()),
        }
    }

    /// One stopword per line; blank lines ignored.
    pub fn from_stopword_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::with_stopwords(
            text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from),
        ))
    }

    /// Lowercases, splits on non-alphanumerics and keeps tokens of two or more characters.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= 2)
            .map(str::to_lowercase)
            .filter(|t| self.stopwords.as_ref().is_none_or(|s| !s.contains(t)))
            .collect()
    }
}

/// Frozen term dictionary with document frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    ids: HashMap<String, u32>,
    document_frequency: Vec<usize>,
    document_count: usize,
}

impl Vocabulary {
    /// Term ids follow lexicographic term order.
    pub fn build<D, T>(documents: D) -> Result<Self>
    where
        D: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut document_count = 0;
        for doc in documents {
            document_count += 1;
            let distinct: HashSet<&String> = doc.as_ref().iter().collect();
            for term in distinct {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
        }
        if document_count == 0 {
            return Err(Error::EmptyCollection);
        }
        let mut terms = Vec::with_capacity(df.len());
        let mut document_frequency = Vec::with_capacity(df.len());
        for (term, count) in df {
            terms.push(term);
            document_frequency.push(count);
        }
        let ids = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Ok(Vocabulary {
            terms,
            ids,
            document_frequency,
            document_count,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn document_count(&self) -> usize {
        self.document_count
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn document_frequency(&self, id: u32) -> usize {
        self.document_frequency[id as usize]
    }

    /// `ln((1 + N) / (1 + df)) + 1`
    pub fn idf(&self, id: u32) -> f64 {
        let n = self.document_count as f64;
        let df = self.document_frequency(id) as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    /// Raw term count times smoothed idf. Unknown terms are ignored.
    pub fn tfidf_vector(&self, document: &[String]) -> SparseVector {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for term in document {
            if let Some(id) = self.term_id(term) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        SparseVector::from_pairs(counts.into_iter().map(|(id, tf)| (id, tf as f64 * self.idf(id))))
    }
}
