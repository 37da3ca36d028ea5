//! Reference-based ground truth for publication recommendation.
//!
//! The pipeline ingests a bibliographic corpus, splits it in time around a
//! present year, turns each target researcher's newly cited publications
//! into ground truth, ranks a shared candidate pool with content-based
//! filtering, scores the rankings with NDCG and MRR, and measures how
//! consistently two evaluation tables order the same methods.

pub mod cbf;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evalmetrics;
pub mod fixtures;
pub mod groundtruth;
pub mod pipeline;
pub mod reproduce;
pub mod sampling;
pub mod statcorr;
pub mod textvec;

pub use error::{Error, Result};
