//! The pipeline stages behind each CLI subcommand.
//!
//! Stages talk to each other only through files in the output directory:
//! `ingest_report.json`, `manifest.json`, `evaluation.csv` (+ `.meta.json`),
//! `correlation.json`/`.txt` and `statistics.csv`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cbf::{rank_by_vector, write_rankings_csv, CbfMethod, FeatureSpace, RankedList};
use crate::config::ExperimentConfig;
use crate::corpus::{ContentFields, Corpus, IngestReport};
use crate::error::{Error, Result};
use crate::evalmetrics::{evaluate_methods, EvaluationTable, Metric, NDCG_VARIANT};
use crate::fixtures;
use crate::groundtruth::{build_experiment_dataset, DatasetManifest, ExperimentDataset};
use crate::statcorr::{
    correlate_tables, dataset_statistics, format_table, CorrelationReport, CorrelationScope, DatasetStatistics,
    PermutationConfig, CITATION_WINDOW,
};
use crate::textvec::Tokenizer;

pub const INGEST_REPORT: &str = "ingest_report.json";
pub const MANIFEST: &str = "manifest.json";
pub const EVALUATION_CSV: &str = "evaluation.csv";
pub const EVALUATION_META: &str = "evaluation.meta.json";
pub const CORRELATION_JSON: &str = "correlation.json";
pub const CORRELATION_TXT: &str = "correlation.txt";
pub const STATISTICS_CSV: &str = "statistics.csv";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn load_corpus(config: &ExperimentConfig) -> Result<(Corpus, IngestReport)> {
    let path = &config.corpus;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::ingest(BufReader::new(file), config.ingest_options()).map_err(|e| e.context(path.display().to_string()))
}

pub fn load_manifest(path: &Path) -> Result<ExperimentDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::InvalidManifest(format!("{}: {e}", path.display())))?;
    manifest.into_dataset()
}

pub fn load_table(path: &Path) -> Result<EvaluationTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    EvaluationTable::read_csv(label, file).map_err(|e| e.context(path.display().to_string()))
}

pub fn cmd_ingest(config: &ExperimentConfig) -> Result<IngestReport> {
    let (_, report) = load_corpus(config)?;
    write_json(&config.output_dir.join(INGEST_REPORT), &report)?;
    Ok(report)
}

pub fn cmd_build_gt(config: &ExperimentConfig) -> Result<(PathBuf, DatasetManifest)> {
    let (corpus, _) = load_corpus(config)?;
    let timeline = config.timeline_for(&corpus)?;
    let dataset =
        build_experiment_dataset(&corpus, &timeline, &config.criteria()).map_err(|e| e.context("build-gt"))?;
    let manifest = DatasetManifest::from(&dataset);
    let path = config.output_dir.join(MANIFEST);
    write_text(&path, &manifest.to_json())?;
    Ok((path, manifest))
}

fn manifest_path(config: &ExperimentConfig, manifest: Option<&Path>) -> PathBuf {
    manifest.map_or_else(|| config.output_dir.join(MANIFEST), Path::to_path_buf)
}

fn tokenizer(config: &ExperimentConfig) -> Result<Tokenizer> {
    match &config.evaluation.stopwords {
        Some(path) => Tokenizer::from_stopword_file(path),
        None => Ok(Tokenizer::new()),
    }
}

#[derive(Debug, Serialize)]
struct EvaluationMeta<'a> {
    label: &'a str,
    n_researchers: usize,
    candidate_pool: usize,
    methods: Vec<CbfMethod>,
    metrics: &'a [Metric],
    metric_variant: &'static str,
    exclude_past_cited: bool,
    content_fields: ContentFields,
    vocabulary_size: usize,
    idf_documents: usize,
}

pub fn cmd_evaluate(config: &ExperimentConfig, manifest: Option<&Path>) -> Result<(PathBuf, EvaluationTable)> {
    config.validate()?;
    let dataset = load_manifest(&manifest_path(config, manifest))?;
    let (corpus, _) = load_corpus(config)?;
    let space = FeatureSpace::for_dataset(&corpus, &dataset, tokenizer(config)?, config.evaluation.content_fields)
        .map_err(|e| e.context("evaluate"))?;
    let methods = config.methods();
    let metrics = &config.evaluation.metrics;
    let exclude = config.evaluation.exclude_past_cited;
    let label = config
        .output_dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "evaluation".into());
    let table = evaluate_methods(&space, &dataset, &methods, metrics, exclude, label.clone())
        .map_err(|e| e.context("evaluate"))?;

    let path = config.output_dir.join(EVALUATION_CSV);
    let mut out = create(&path)?;
    table.write_csv(&mut out)?;
    out.flush().map_err(|e| Error::io(&path, e))?;

    let meta = EvaluationMeta {
        label: &label,
        n_researchers: table.n_researchers,
        candidate_pool: dataset.candidate_pool.len(),
        methods: methods.clone(),
        metrics,
        metric_variant: NDCG_VARIANT,
        exclude_past_cited: exclude,
        content_fields: config.evaluation.content_fields,
        vocabulary_size: space.vocabulary().len(),
        idf_documents: space.vocabulary().document_count(),
    };
    write_json(&config.output_dir.join(EVALUATION_META), &meta)?;

    if config.evaluation.write_rankings {
        write_rankings(config, &space, &dataset, &methods)?;
    }
    Ok((path, table))
}

fn write_rankings(
    config: &ExperimentConfig,
    space: &FeatureSpace<'_>,
    dataset: &ExperimentDataset,
    methods: &[CbfMethod],
) -> Result<()> {
    for method in methods {
        let candidates = space.candidate_features(dataset, method.publication)?;
        let mut lists: Vec<RankedList> = Vec::new();
        for r in &dataset.researchers {
            let profile = space.researcher_feature(r, &dataset.timeline, method.researcher)?;
            let excluded = if config.evaluation.exclude_past_cited {
                crate::cbf::past_cited(space.corpus(), r, &dataset.timeline)?
            } else {
                Default::default()
            };
            lists.push(rank_by_vector(r, &candidates, &profile, &excluded));
        }
        let path = config.output_dir.join(format!("rankings_{method}.csv"));
        let mut out = create(&path)?;
        write_rankings_csv(&lists, &mut out)?;
        out.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationOutput {
    pub table_a: String,
    pub table_b: String,
    pub permutation: PermutationConfig,
    pub reports: Vec<CorrelationReport>,
}

pub fn correlate(
    a: &EvaluationTable,
    b: &EvaluationTable,
    scopes: &[CorrelationScope],
    permutation: PermutationConfig,
) -> Result<CorrelationOutput> {
    let mut reports = Vec::new();
    for &scope in scopes {
        reports.extend(correlate_tables(a, b, scope, &permutation)?);
    }
    Ok(CorrelationOutput {
        table_a: a.label.clone(),
        table_b: b.label.clone(),
        permutation,
        reports,
    })
}

pub fn cmd_correlate(
    table_a: &Path,
    table_b: &Path,
    scopes: &[CorrelationScope],
    permutation: PermutationConfig,
    output_dir: &Path,
) -> Result<CorrelationOutput> {
    let a = load_table(table_a)?;
    let b = load_table(table_b)?;
    let output = correlate(&a, &b, scopes, permutation)?;
    write_json(&output_dir.join(CORRELATION_JSON), &output)?;
    write_text(&output_dir.join(CORRELATION_TXT), &format_table(&output.reports))?;
    Ok(output)
}

pub fn cmd_describe(config: &ExperimentConfig, manifest: Option<&Path>) -> Result<DatasetStatistics> {
    let dataset = load_manifest(&manifest_path(config, manifest))?;
    if dataset.researchers.is_empty() && dataset.criteria.strict {
        return Err(Error::NoEligibleResearchers.context("describe"));
    }
    let (corpus, _) = load_corpus(config)?;
    let stats = dataset_statistics(&corpus, &dataset)?;
    write_text(&config.output_dir.join(STATISTICS_CSV), &statistics_csv(&stats))?;
    Ok(stats)
}

fn statistics_rows(s: &DatasetStatistics) -> [(&'static str, String); 6] {
    [
        ("Target Researchers", s.researchers.to_string()),
        (
            "Written Publications per Researcher",
            format!("{:.1}", s.written_publications_per_researcher),
        ),
        (
            "Citations per Publication",
            format!("{:.1}", s.citations_per_publication),
        ),
        (
            "References per Publication",
            format!("{:.1}", s.references_per_publication),
        ),
        ("Candidate Publications", s.candidate_publications.to_string()),
        (
            "Relevant Publications per Researcher",
            format!("{:.1}", s.relevant_publications_per_researcher),
        ),
    ]
}

pub fn statistics_csv(s: &DatasetStatistics) -> String {
    let mut out = String::from("statistic,value\n");
    let exact = [
        s.researchers as f64,
        s.written_publications_per_researcher,
        s.citations_per_publication,
        s.references_per_publication,
        s.candidate_publications as f64,
        s.relevant_publications_per_researcher,
    ];
    for ((name, _), value) in statistics_rows(s).iter().zip(exact) {
        out.push_str(&format!("{name},{value:.6}\n"));
    }
    out
}

/// Side-by-side text table; the published columns come from the bundled fixture.
pub fn format_statistics(s: &DatasetStatistics, with_published: bool) -> String {
    let published = fixtures::table1();
    let theirs = [statistics_rows(&published.d), statistics_rows(&published.d_prime)];
    let mut out = String::new();
    if with_published {
        out.push_str(&format!(
            "{:<38} {:>10} {:>10} {:>10}\n",
            "Dataset", "this", "D (pub.)", "D' (pub.)"
        ));
    } else {
        out.push_str(&format!("{:<38} {:>10}\n", "Dataset", "this"));
    }
    for (i, (name, value)) in statistics_rows(s).into_iter().enumerate() {
        if with_published {
            out.push_str(&format!(
                "{name:<38} {value:>10} {:>10} {:>10}\n",
                theirs[0][i].1, theirs[1][i].1
            ));
        } else {
            out.push_str(&format!("{name:<38} {value:>10}\n"));
        }
    }
    out.push_str(&format!("({CITATION_WINDOW})\n"));
    out
}
