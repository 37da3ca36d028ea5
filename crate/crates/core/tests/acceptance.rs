//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by
//! the individual checks, and exits non-zero if any criterion failed.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use refgt::cbf::{FeatureScheme, FeatureSpace};
use refgt::config::ExperimentConfig;
use refgt::corpus::{ContentFields, Corpus, IngestOptions};
use refgt::evalmetrics::{ndcg_at_k, reciprocal_rank, Metric};
use refgt::fixtures::{table2_d, table2_d_prime};
use refgt::pipeline::{self, correlate};
use refgt::statcorr::{
    kendall_tau_b, pearson_r, spearman_rho, Coefficient, CorrelationScope, Estimate, PermutationConfig,
    SignificanceBucket, Verdict,
};
use refgt::textvec::{SparseVector, Tokenizer};

/// Gap allowed between a recomputed coefficient and its published value.
const VALUE_TOLERANCE: f64 = 0.05;
/// Numerical agreement for oracle, algebra and invariance checks.
const EXACT_TOLERANCE: f64 = 1e-9;
/// Permutations at least this close to the observed magnitude count as extreme.
const TIE_TOLERANCE: f64 = 1e-12;
const PERMUTATION_SEED: u64 = 11;
const GENERAL_BUDGET: Duration = Duration::from_secs(1);
const PER_METRIC_BUDGET: Duration = Duration::from_secs(5);
const GROUND_TRUTH_BUDGET: Duration = Duration::from_secs(1);
const RANDOM_CORPORA: u32 = 128;
const RANDOM_SERIES: usize = 1000;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[derive(Default)]
struct Outcome {
    checks: Vec<(bool, String)>,
}

impl Outcome {
    fn check(&mut self, ok: bool, message: impl Into<String>) {
        self.checks.push((ok, message.into()));
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(ok, _)| *ok)
    }
}

fn describe(e: &Estimate) -> String {
    format!(
        "{:.3} (p={:.4}, bucket {:?}, {:?})",
        e.value, e.p_value, e.bucket, e.verdict
    )
}

fn within(observed: f64, expected: f64) -> bool {
    (observed - expected).abs() <= VALUE_TOLERANCE
}

fn general_reproduction() -> Outcome {
    let mut o = Outcome::default();
    let start = Instant::now();
    let output = correlate(
        &table2_d(),
        &table2_d_prime(),
        &[CorrelationScope::General],
        PermutationConfig::with_seed(PERMUTATION_SEED),
    )
    .expect("general correlation");
    let elapsed = start.elapsed();
    let report = &output.reports[0];
    o.check(
        report.n == 24,
        format!("paired series length {} (expected 24)", report.n),
    );
    for (coefficient, expected) in [
        (Coefficient::Pearson, 0.48),
        (Coefficient::Spearman, 0.81),
        (Coefficient::Kendall, 0.64),
    ] {
        let e = report.estimate(coefficient);
        o.check(
            within(e.value, expected) && e.verdict == Verdict::Reported && e.bucket == SignificanceBucket::P001,
            format!(
                "{coefficient}: {} expected {expected:.2} ± {VALUE_TOLERANCE}, bucket P001, Reported",
                describe(e)
            ),
        );
    }
    o.check(
        elapsed < GENERAL_BUDGET,
        format!("runtime {elapsed:?} < {GENERAL_BUDGET:?}"),
    );
    o
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

fn oracle_kendall(x: &[f64], y: &[f64]) -> f64 {
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tie_x += 1.0;
            } else if dy == 0.0 {
                tie_y += 1.0;
            } else if dx.signum() == dy.signum() {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    (concordant - discordant) / ((concordant + discordant + tie_x) * (concordant + discordant + tie_y)).sqrt()
}

fn oracle_statistic(coefficient: Coefficient, x: &[f64], y: &[f64]) -> f64 {
    match coefficient {
        Coefficient::Pearson => oracle_pearson(x, y),
        Coefficient::Spearman => oracle_spearman(x, y),
        Coefficient::Kendall => oracle_kendall(x, y),
    }
}

/// Lexicographic successor; false once `perm` is the last ordering.
fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&v| v > perm[i]).expect("successor exists");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Two-sided exact p-value over all orderings of `y`, with the count of orderings.
fn oracle_p_value(coefficient: Coefficient, x: &[f64], y: &[f64]) -> (f64, u64) {
    let observed = oracle_statistic(coefficient, x, y);
    let mut perm: Vec<usize> = (0..y.len()).collect();
    let (mut extreme, mut total) = (0u64, 0u64);
    loop {
        let shuffled: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        total += 1;
        if oracle_statistic(coefficient, x, &shuffled).abs() >= observed.abs() - TIE_TOLERANCE {
            extreme += 1;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    (extreme as f64 / total as f64, total)
}

enum Expected {
    Value(f64, SignificanceBucket),
    NoCorrelation,
}

fn per_metric_reproduction() -> Outcome {
    use Expected::{NoCorrelation, Value};
    use SignificanceBucket::{P02, P03};
    let expectations: [(Metric, [Expected; 3]); 3] = [
        (Metric::Ndcg(5), [Value(0.61, P03), Value(0.60, P02), Value(0.50, P02)]),
        (Metric::Ndcg(10), [NoCorrelation, Value(0.54, P02), Value(0.43, P02)]),
        (Metric::Mrr, [NoCorrelation, NoCorrelation, NoCorrelation]),
    ];

    let mut o = Outcome::default();
    let (d, d_prime) = (table2_d(), table2_d_prime());
    let start = Instant::now();
    let output = correlate(
        &d,
        &d_prime,
        &[CorrelationScope::PerMetric],
        PermutationConfig::with_seed(PERMUTATION_SEED),
    )
    .expect("per-metric correlation");
    let elapsed = start.elapsed();

    for (metric, cells) in &expectations {
        let Some(report) = output.reports.iter().find(|r| r.metric == Some(*metric)) else {
            o.check(false, format!("{metric}: no report"));
            continue;
        };
        let rows: Vec<_> = d.rows.iter().filter(|r| r.metric == *metric).collect();
        let x: Vec<f64> = rows.iter().map(|r| r.mean_score).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| d_prime.get(r.method, r.metric).expect("shared key"))
            .collect();
        for (coefficient, expected) in Coefficient::ALL.into_iter().zip(cells) {
            let e = report.estimate(coefficient);
            let (oracle_p, orderings) = oracle_p_value(coefficient, &x, &y);
            let oracle_value = oracle_statistic(coefficient, &x, &y);
            o.check(
                orderings == 40_320
                    && (oracle_p - e.p_value).abs() <= TIE_TOLERANCE
                    && (oracle_value - e.value).abs() <= EXACT_TOLERANCE,
                format!(
                    "{metric} {coefficient}: exact oracle p={oracle_p:.4} over {orderings} orderings, value {oracle_value:.3}"
                ),
            );
            match expected {
                Value(value, bucket) => {
                    let oracle_bucket = SignificanceBucket::for_p_value(oracle_p);
                    o.check(
                        within(e.value, *value) && e.bucket == *bucket && e.verdict == Verdict::Reported,
                        format!(
                            "{metric} {coefficient}: {} expected {value:.2} ± {VALUE_TOLERANCE}, bucket {bucket:?} (oracle bucket {oracle_bucket:?})",
                            describe(e)
                        ),
                    );
                }
                NoCorrelation => o.check(
                    e.verdict == Verdict::NoCorrelation,
                    format!("{metric} {coefficient}: {} expected NoCorrelation", describe(e)),
                ),
            }
        }
    }
    o.check(
        elapsed < PER_METRIC_BUDGET,
        format!("runtime {elapsed:?} < {PER_METRIC_BUDGET:?}"),
    );
    o
}

struct OraclePublication {
    year: i32,
    authors: Vec<String>,
    references: Vec<String>,
}

fn read_oracle_corpus(path: &Path) -> BTreeMap<String, OraclePublication> {
    let text = std::fs::read_to_string(path).expect("corpus");
    let strings = |v: &serde_json::Value| -> Vec<String> {
        v.as_array()
            .map(|a| a.iter().filter_map(|s| s.as_str().map(String::from)).collect())
            .unwrap_or_default()
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let v: serde_json::Value = serde_json::from_str(line).expect("json line");
            (
                v["id"].as_str().expect("id").to_string(),
                OraclePublication {
                    year: v["year"].as_i64().expect("year") as i32,
                    authors: strings(&v["authors"]),
                    references: strings(&v["references"]),
                },
            )
        })
        .collect()
}

/// Scans every (researcher, publication) pair; selection thresholds match the
/// synthetic profile: 1..=2 restricted-past, >= 5 restricted-future, junior,
/// non-empty ground truth.
fn pair_scan_oracle(
    corpus: &BTreeMap<String, OraclePublication>,
    present: i32,
    past_start: i32,
    future_end: i32,
) -> BTreeMap<String, BTreeSet<String>> {
    let authors: BTreeSet<&str> = corpus
        .values()
        .flat_map(|p| p.authors.iter().map(String::as_str))
        .collect();
    let mut selected = BTreeMap::new();
    for r in authors {
        let written: Vec<&OraclePublication> = corpus.values().filter(|p| p.authors.iter().any(|a| a == r)).collect();
        let past: Vec<_> = written
            .iter()
            .filter(|p| past_start <= p.year && p.year < present)
            .collect();
        let future: Vec<_> = written
            .iter()
            .filter(|p| present <= p.year && p.year <= future_end)
            .collect();
        let junior = written.iter().all(|p| p.year >= past_start);
        if !(junior && (1..=2).contains(&past.len()) && future.len() >= 5) {
            continue;
        }
        let mut truth = BTreeSet::new();
        for (qid, q) in corpus {
            if q.year >= present {
                continue;
            }
            let cites = |set: &[&&OraclePublication]| set.iter().any(|p| p.references.iter().any(|x| x == qid));
            if cites(&future) && !cites(&past) {
                truth.insert(qid.clone());
            }
        }
        if !truth.is_empty() {
            selected.insert(r.to_string(), truth);
        }
    }
    selected
}

fn synthetic_config(output_dir: &Path) -> ExperimentConfig {
    let mut config = ExperimentConfig::load(&fixture("synthetic.toml")).expect("synthetic config");
    config.output_dir = output_dir.to_path_buf();
    config
}

fn ground_truth_oracle() -> Outcome {
    let mut o = Outcome::default();
    let dir = tempfile::tempdir().expect("tempdir");
    let config = synthetic_config(dir.path());
    let start = Instant::now();
    let (_, manifest) = pipeline::cmd_build_gt(&config).expect("build-gt");
    let elapsed = start.elapsed();

    let t = &config.timeline;
    let oracle = pair_scan_oracle(
        &read_oracle_corpus(&fixture("synthetic_corpus.jsonl")),
        t.present,
        t.past_start,
        t.future_end,
    );
    let built: BTreeMap<String, BTreeSet<String>> = manifest
        .ground_truth
        .iter()
        .map(|(r, ids)| (r.clone(), ids.iter().cloned().collect()))
        .collect();
    o.check(
        manifest.researchers == oracle.keys().cloned().collect::<Vec<_>>(),
        format!(
            "selected researchers {:?} (oracle {:?})",
            manifest.researchers,
            oracle.keys().collect::<Vec<_>>()
        ),
    );
    for (r, truth) in &oracle {
        o.check(
            built.get(r) == Some(truth),
            format!("{r}: ground truth {:?} (oracle {truth:?})", built.get(r)),
        );
    }
    let union: BTreeSet<String> = oracle.values().flatten().cloned().collect();
    o.check(
        manifest.candidate_pool.iter().cloned().collect::<BTreeSet<_>>() == union,
        format!(
            "candidate pool of {} equals the oracle union of {}",
            manifest.candidate_pool.len(),
            union.len()
        ),
    );

    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("synthetic_expected.json")).expect("expected"))
            .expect("expected json");
    let hand = |v: &serde_json::Value| -> BTreeSet<String> {
        v.as_array()
            .into_iter()
            .flatten()
            .filter_map(|s| s.as_str().map(String::from))
            .collect()
    };
    let hand_truth: BTreeMap<String, BTreeSet<String>> = expected["ground_truth"]
        .as_object()
        .expect("ground_truth object")
        .iter()
        .map(|(r, ids)| (r.clone(), hand(ids)))
        .collect();
    o.check(built == hand_truth, "ground truth equals the hand-derived fixture");
    o.check(
        hand(&expected["candidate_pool"]) == union,
        "candidate pool equals the hand-derived fixture",
    );
    o.check(
        elapsed < GROUND_TRUTH_BUDGET,
        format!("runtime {elapsed:?} < {GROUND_TRUTH_BUDGET:?}"),
    );
    o
}

fn reference_dcg(relevance: &[bool], k: usize) -> f64 {
    relevance
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, r)| **r)
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum()
}

fn reference_ndcg(relevance: &[bool], truth_size: usize, k: usize) -> f64 {
    let ideal: f64 = (0..truth_size.min(k)).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();
    reference_dcg(relevance, k) / ideal
}

fn reference_rr(relevance: &[bool]) -> f64 {
    relevance.iter().position(|r| *r).map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

fn metric_oracle() -> Outcome {
    let mut o = Outcome::default();
    let mut compared = 0usize;
    let mut mismatches = Vec::new();
    for len in 0..=8usize {
        let ids: Vec<String> = (0..len).map(|i| format!("r{i}")).collect();
        let ranking: Vec<&str> = ids.iter().map(String::as_str).collect();
        for pattern in 0u32..(1 << len) {
            let relevance: Vec<bool> = (0..len).map(|i| pattern & (1 << i) != 0).collect();
            for missing in 0..=3usize {
                let mut truth: BTreeSet<String> = ids
                    .iter()
                    .zip(&relevance)
                    .filter(|(_, r)| **r)
                    .map(|(id, _)| id.clone())
                    .collect();
                truth.extend((0..missing).map(|i| format!("absent{i}")));
                if truth.is_empty() {
                    let undefined =
                        ndcg_at_k(&ranking, &truth, 5).is_err() && reciprocal_rank(&ranking, &truth).is_err();
                    if !undefined {
                        mismatches.push(format!("len {len}: empty ground truth accepted"));
                    }
                    continue;
                }
                for (name, got, want) in [
                    (
                        "NDCG@5",
                        ndcg_at_k(&ranking, &truth, 5),
                        reference_ndcg(&relevance, truth.len(), 5),
                    ),
                    (
                        "NDCG@10",
                        ndcg_at_k(&ranking, &truth, 10),
                        reference_ndcg(&relevance, truth.len(), 10),
                    ),
                    ("RR", reciprocal_rank(&ranking, &truth), reference_rr(&relevance)),
                ] {
                    compared += 1;
                    match got {
                        Ok(v) if (v - want).abs() <= EXACT_TOLERANCE => {}
                        other => mismatches.push(format!(
                            "{name} len {len} pattern {pattern:b} +{missing}: {other:?} vs {want}"
                        )),
                    }
                }
            }
        }
    }
    o.check(
        mismatches.is_empty(),
        format!(
            "{compared} metric values agree with the reference to {EXACT_TOLERANCE:e}; mismatches: {:?}",
            mismatches.iter().take(5).collect::<Vec<_>>()
        ),
    );

    let truth: BTreeSet<String> = ["a", "c"].iter().map(|s| s.to_string()).collect();
    let worked = ndcg_at_k(&["a", "b", "c", "d", "e"], &truth, 5).expect("worked example");
    o.check(
        (worked - 0.91972).abs() <= 5e-6,
        format!("worked example: relevant at ranks 1 and 3 of |GT|=2 gives NDCG@5 {worked:.5} (expected 0.91972)"),
    );
    o
}

const WORDS: [&str; 12] = [
    "graph",
    "citation",
    "ranking",
    "topic",
    "model",
    "query",
    "network",
    "author",
    "venue",
    "index",
    "learning",
    "retrieval",
];

/// Year, title word indices, reference indices.
type RandomPublication = (i32, Vec<usize>, Vec<usize>);

fn corpus_strategy() -> impl Strategy<Value = (Vec<RandomPublication>, i32)> {
    (2usize..24)
        .prop_flat_map(|n| {
            prop::collection::vec(
                (
                    1995i32..2012,
                    prop::collection::vec(0..WORDS.len(), 1..8),
                    prop::collection::vec(0..n + 1, 0..6),
                ),
                n,
            )
        })
        .prop_flat_map(|pubs| (Just(pubs), 1995i32..2014))
}

fn random_corpus(pubs: &[RandomPublication]) -> Corpus {
    let n = pubs.len();
    let lines: Vec<String> = pubs
        .iter()
        .enumerate()
        .map(|(i, (year, words, refs))| {
            // index `n` points outside the corpus: a dangling reference
            let references: Vec<String> = refs
                .iter()
                .map(|&r| if r == n { "ghost".to_string() } else { format!("p{r}") })
                .collect();
            let title: Vec<&str> = words.iter().map(|&w| WORDS[w]).collect();
            serde_json::json!({
                "id": format!("p{i}"),
                "year": year,
                "title": title.join(" "),
                "abstract": title.iter().rev().cloned().collect::<Vec<_>>().join(" "),
                "authors": [format!("a{}", i % 3)],
                "references": references,
            })
            .to_string()
        })
        .collect();
    Corpus::ingest(lines.join("\n").as_bytes(), IngestOptions::default())
        .expect("random corpus")
        .0
}

/// Largest entrywise gap between F4 and F2 + F3 - F1 over every publication.
fn algebra_gap(corpus: &Corpus, cutoff: i32) -> f64 {
    let ids: Vec<&str> = corpus.publications().map(|p| p.id.as_str()).collect();
    let space = FeatureSpace::from_documents(
        corpus,
        ids.iter().copied(),
        Tokenizer::new(),
        ContentFields::TitleAbstract,
    )
    .expect("feature space");
    let mut gap: f64 = 0.0;
    for id in ids {
        let f = |s| space.publication_feature(id, s, cutoff).expect("feature");
        let (f1, f2, f3, f4) = (
            f(FeatureScheme::F1),
            f(FeatureScheme::F2),
            f(FeatureScheme::F3),
            f(FeatureScheme::F4),
        );
        let identity: SparseVector = &(&f2 + &f3) - &f1;
        let terms: BTreeSet<u32> = f4.iter().chain(identity.iter()).map(|(t, _)| t).collect();
        for t in terms {
            gap = gap.max((f4.get(t) - identity.get(t)).abs());
        }
    }
    gap
}

fn feature_algebra() -> Outcome {
    let mut o = Outcome::default();
    let mut runner = TestRunner::new(ProptestConfig {
        cases: RANDOM_CORPORA,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let result = runner.run(&corpus_strategy(), |(pubs, cutoff)| {
        let corpus = random_corpus(&pubs);
        for c in [cutoff, i32::MAX] {
            let gap = algebra_gap(&corpus, c);
            prop_assert!(gap <= EXACT_TOLERANCE, "gap {} at cutoff {}", gap, c);
        }
        Ok(())
    });
    o.check(
        result.is_ok(),
        format!("{RANDOM_CORPORA} random corpora satisfy F4 = F2 + F3 - F1: {result:?}"),
    );

    let file = std::fs::File::open(fixture("synthetic_corpus.jsonl")).expect("synthetic corpus");
    let (synthetic, _) = Corpus::ingest(std::io::BufReader::new(file), IngestOptions::default()).expect("ingest");
    for cutoff in [2006, i32::MAX] {
        let gap = algebra_gap(&synthetic, cutoff);
        o.check(
            gap <= EXACT_TOLERANCE,
            format!("synthetic corpus, cutoff {cutoff}: largest gap {gap:e}"),
        );
    }
    o
}

fn random_series(rng: &mut StdRng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let n = rng.random_range(3..40);
        let tied = rng.random_bool(0.3);
        let mut draw = || {
            let v: f64 = rng.random_range(-3.0..3.0);
            if tied {
                v.round()
            } else {
                v
            }
        };
        let x: Vec<f64> = (0..n).map(|_| draw()).collect();
        let y: Vec<f64> = (0..n).map(|_| draw()).collect();
        let varies = |v: &[f64]| v.iter().any(|a| *a != v[0]);
        if varies(&x) && varies(&y) {
            return (x, y);
        }
    }
}

fn correlation_invariances() -> Outcome {
    let mut o = Outcome::default();
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let mut worst = [0.0f64; 5];
    let labels = [
        "Spearman under monotone transform",
        "Kendall under monotone transform",
        "Pearson under positive affine transform",
        "negation antisymmetry (all three)",
        "values within [-1, 1]",
    ];
    for _ in 0..RANDOM_SERIES {
        let (x, y) = random_series(&mut rng);
        let monotone: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v + 7.0).collect();
        let (a, b) = (rng.random_range(0.01..50.0), rng.random_range(-20.0..20.0));
        let affine: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let negated: Vec<f64> = x.iter().map(|v| -v).collect();

        let p = pearson_r(&x, &y).expect("pearson");
        let s = spearman_rho(&x, &y).expect("spearman");
        let k = kendall_tau_b(&x, &y).expect("kendall");
        worst[0] = worst[0].max((spearman_rho(&monotone, &y).expect("spearman") - s).abs());
        worst[1] = worst[1].max((kendall_tau_b(&monotone, &y).expect("kendall") - k).abs());
        worst[2] = worst[2].max((pearson_r(&affine, &y).expect("pearson") - p).abs());
        for (negated_value, value) in [
            (pearson_r(&negated, &y).expect("pearson"), p),
            (spearman_rho(&negated, &y).expect("spearman"), s),
            (kendall_tau_b(&negated, &y).expect("kendall"), k),
        ] {
            worst[3] = worst[3].max((negated_value + value).abs());
        }
        for v in [p, s, k] {
            worst[4] = worst[4].max(v.abs() - 1.0);
        }
    }
    for (label, gap) in labels.iter().zip(worst) {
        o.check(
            gap <= EXACT_TOLERANCE,
            format!("{label}: largest gap {gap:e} over {RANDOM_SERIES} series"),
        );
    }
    o
}

fn run_pipeline(root: &Path) -> [Vec<u8>; 3] {
    let out = root.join("out");
    let config = synthetic_config(&out);
    pipeline::cmd_ingest(&config).expect("ingest");
    let (manifest, _) = pipeline::cmd_build_gt(&config).expect("build-gt");
    let (evaluation, _) = pipeline::cmd_evaluate(&config, None).expect("evaluate");
    pipeline::cmd_correlate(
        &evaluation,
        &fixture("table2_d_prime.csv"),
        &[CorrelationScope::General, CorrelationScope::PerMetric],
        config.permutation(),
        &out,
    )
    .expect("correlate");
    let read = |p: &Path| std::fs::read(p).expect("artifact");
    [
        read(&manifest),
        read(&evaluation),
        read(&out.join(pipeline::CORRELATION_JSON)),
    ]
}

fn determinism() -> Outcome {
    let mut o = Outcome::default();
    let (first, second) = (
        tempfile::tempdir().expect("tempdir"),
        tempfile::tempdir().expect("tempdir"),
    );
    let a = run_pipeline(first.path());
    let b = run_pipeline(second.path());
    for ((name, x), y) in ["manifest.json", "evaluation.csv", "correlation.json"]
        .iter()
        .zip(&a)
        .zip(&b)
    {
        o.check(
            !x.is_empty() && x == y,
            format!("{name}: {} bytes, identical across runs", x.len()),
        );
    }
    o
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        (
            "general correlations reproduce the published table",
            general_reproduction,
        ),
        (
            "per-metric correlations reproduce the published table",
            per_metric_reproduction,
        ),
        ("build-gt matches the pair-scan oracle", ground_truth_oracle),
        ("ranking metrics match the exhaustive reference", metric_oracle),
        ("feature algebra F4 = F2 + F3 - F1", feature_algebra),
        ("correlation invariances", correlation_invariances),
        ("pipeline runs are byte-identical", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let message = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            let mut o = Outcome::default();
            o.check(false, format!("panicked: {message}"));
            o
        });
        let passed = outcome.passed();
        failed += usize::from(!passed);
        println!(
            "criterion {}: {} {name} ({:.2?})",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed()
        );
        for (ok, message) in &outcome.checks {
            println!("    [{}] {message}", if *ok { "ok" } else { "FAIL" });
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
