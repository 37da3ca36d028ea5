use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use refgt::config::{AllMarker, ExperimentConfig, SampleSize};
use refgt::pipeline;
use refgt::reproduce::reproduce_table3;
use refgt::statcorr::{format_table, CorrelationScope, PermutationConfig};
use refgt::Error;

#[derive(Parser)]
#[command(
    name = "refgt",
    version,
    about = "Reference-based ground truth for publication recommendation"
)]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long, short, required_unless_present = "corpus")]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// A count, or `all`.
    #[arg(long, value_parser = parse_sample_size)]
    sample_size: Option<SampleSize>,
}

fn parse_sample_size(s: &str) -> Result<SampleSize, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(SampleSize::All(AllMarker::All));
    }
    s.parse().map(SampleSize::Count).map_err(|e| format!("{e}"))
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut config = match (&self.config, &self.corpus) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(corpus)) => ExperimentConfig::with_corpus(corpus.clone()),
            (None, None) => return Err(Error::Config("either --config or --corpus is required".into())),
        };
        if let Some(c) = &self.corpus {
            config.corpus = c.clone();
        }
        if let Some(o) = &self.output_dir {
            config.output_dir = o.clone();
        }
        if let Some(s) = self.seed {
            config.seeds.sampling = s;
        }
        if let Some(k) = self.sample_size {
            config.selection.sample_size = k;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ScopeArg {
    General,
    PerMetric,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and index the corpus.
    Ingest(ConfigArgs),
    /// Select target researchers and write the dataset manifest.
    BuildGt(ConfigArgs),
    /// Rank the candidate pool with every configured method and score it.
    Evaluate {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Correlate two evaluation tables.
    Correlate {
        table_a: PathBuf,
        table_b: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        scope: ScopeArg,
        /// Permutation seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Dataset statistics for a manifest.
    Describe {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Print the published statistics alongside.
        #[arg(long)]
        compare_published: bool,
    },
    /// Recompute the published correlation table from the bundled score tables.
    ReproducePaper {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Ingest(args) => {
            let config = args.load()?;
            init_threads(&config)?;
            let r = pipeline::cmd_ingest(&config)?;
            println!(
                "{} publications, {} researchers, {} reference edges, {} dropped, {} kept dangling",
                r.publications, r.researchers, r.reference_edges, r.dropped_edges, r.kept_dangling_edges
            );
        }
        Command::BuildGt(args) => {
            let config = args.load()?;
            init_threads(&config)?;
            let (path, m) = pipeline::cmd_build_gt(&config)?;
            println!(
                "{} researchers, {} candidate publications -> {}",
                m.researchers.len(),
                m.candidate_pool.len(),
                path.display()
            );
        }
        Command::Evaluate { args, manifest } => {
            let config = args.load()?;
            init_threads(&config)?;
            let (path, table) = pipeline::cmd_evaluate(&config, manifest.as_deref())?;
            println!(
                "{} rows over {} researchers -> {}",
                table.rows.len(),
                table.n_researchers,
                path.display()
            );
        }
        Command::Correlate {
            table_a,
            table_b,
            scope,
            seed,
            output_dir,
        } => {
            let scopes = match scope {
                ScopeArg::General => vec![CorrelationScope::General],
                ScopeArg::PerMetric => vec![CorrelationScope::PerMetric],
                ScopeArg::Both => vec![CorrelationScope::General, CorrelationScope::PerMetric],
            };
            let out = pipeline::cmd_correlate(
                &table_a,
                &table_b,
                &scopes,
                PermutationConfig::with_seed(seed),
                &output_dir,
            )?;
            print!("{}", format_table(&out.reports));
        }
        Command::Describe {
            args,
            manifest,
            compare_published,
        } => {
            let config = args.load()?;
            let stats = pipeline::cmd_describe(&config, manifest.as_deref())?;
            print!("{}", pipeline::format_statistics(&stats, compare_published));
        }
        Command::ReproducePaper { seed, output_dir } => {
            let repro = reproduce_table3(PermutationConfig::with_seed(seed))?;
            print!("{}", format_table(&repro.output.reports));
            println!();
            for c in &repro.checks {
                println!(
                    "[{}] {} / {}: expected {}, got {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.row,
                    c.coefficient,
                    c.expected,
                    c.observed
                );
            }
            if let Some(dir) = output_dir {
                write_reproduction(&dir, &repro)?;
            }
            if !repro.passed() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn init_threads(config: &ExperimentConfig) -> Result<(), Error> {
    if let Some(n) = config.threads {
        // a --threads flag may already have built the pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write_reproduction(dir: &Path, repro: &refgt::reproduce::Reproduction) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("reproduction.json");
    let text = serde_json::to_string_pretty(repro).expect("serializable");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
