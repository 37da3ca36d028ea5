//! Published reference tables bundled with the crate.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::evalmetrics::EvaluationTable;
use crate::statcorr::{DatasetStatistics, SignificanceBucket};

/// Mean scores of the eight comparable CBF methods on the reference-built dataset.
pub const TABLE2_D_CSV: &str = include_str!("../fixtures/table2_d.csv");
/// The same methods on the manually surveyed dataset.
pub const TABLE2_D_PRIME_CSV: &str = include_str!("../fixtures/table2_d_prime.csv");
pub const TABLE1_JSON: &str = include_str!("../fixtures/table1_published.json");
pub const TABLE3_JSON: &str = include_str!("../fixtures/table3_published.json");

pub fn table2_d() -> EvaluationTable {
    EvaluationTable::read_csv("D", TABLE2_D_CSV.as_bytes()).expect("bundled table parses")
}

pub fn table2_d_prime() -> EvaluationTable {
    EvaluationTable::read_csv("D'", TABLE2_D_PRIME_CSV.as_bytes()).expect("bundled table parses")
}

#[derive(Clone, Debug, Deserialize)]
pub struct PublishedStatistics {
    #[serde(rename = "D")]
    pub d: DatasetStatistics,
    #[serde(rename = "D_prime")]
    pub d_prime: DatasetStatistics,
}

pub fn table1() -> PublishedStatistics {
    serde_json::from_str(TABLE1_JSON).expect("bundled table parses")
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
pub struct PublishedCell {
    pub value: f64,
    pub bucket: SignificanceBucket,
}

/// `None` cells were published as "No".
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
pub struct PublishedRow {
    pub pearson: Option<PublishedCell>,
    pub spearman: Option<PublishedCell>,
    pub kendall: Option<PublishedCell>,
}

/// Keyed by `general` or a metric name.
pub fn table3() -> BTreeMap<String, PublishedRow> {
    serde_json::from_str(TABLE3_JSON).expect("bundled table parses")
}
