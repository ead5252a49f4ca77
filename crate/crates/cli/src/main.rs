use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use candle_engine::checkpoint::{CheckpointDir, Stage};
use candle_engine::config::PipelineConfig;
use candle_engine::kbstore::{KbIndex, KbQuery, KbRecord};
use candle_engine::pipeline::{format_report, load_reports, Pipeline, PipelineError};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "candle", version, about = "Build and query a cultural commonsense knowledge base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated stages; all stages when omitted.
        #[arg(long, value_delimiter = ',')]
        stages: Vec<Stage>,
    },
    /// Query a built knowledge base.
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Check a configuration file, its catalog and pattern file.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print per-stage counts from the last runs.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum KbCommand {
    Query(QueryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Table,
}

#[derive(Args)]
struct QueryArgs {
    /// Knowledge-base file.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    kb: Option<PathBuf>,
    /// Read the knowledge-base location from a configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    subject: Option<String>,
    #[arg(long)]
    facet: Option<String>,
    #[arg(long)]
    concept: Option<String>,
    #[arg(long)]
    min_score: Option<f64>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
}

/// An error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure { code: e.exit_code() as u8, error: e.into() }
    }
}

fn config_failure(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: e.into() }
}

fn stage_failure(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: e.into() }
}

fn load_config(path: &Path) -> Result<PipelineConfig, Failure> {
    PipelineConfig::load(path).map_err(config_failure)
}

fn run(config: &Path, stages: Vec<Stage>) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let stages = if stages.is_empty() { Stage::ALL.to_vec() } else { stages };
    let pipeline = Pipeline::new(cfg)?;
    let reports = pipeline.run(&stages)?;
    print!("{}", format_report(&reports));
    if stages.contains(&Stage::Rank) {
        println!("knowledge base: {}", pipeline.config().kb_path().display());
    }
    Ok(())
}

fn validate(config: &Path) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let pipeline = Pipeline::new(cfg).map_err(|e| match e {
        PipelineError::Provider(_) => config_failure(e),
        other => other.into(),
    })?;
    let cat = pipeline.catalog();
    println!(
        "ok: {} domains, {} subjects, checkpoints in {}",
        cat.domains().len(),
        cat.subjects().len(),
        pipeline.config().checkpoint_dir.display()
    );
    Ok(())
}

fn report(config: &Path) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let reports = load_reports(&CheckpointDir::new(&cfg.checkpoint_dir))?;
    if reports.is_empty() {
        println!("no stage has run yet in {}", cfg.checkpoint_dir.display());
    } else {
        print!("{}", format_report(&reports));
    }
    Ok(())
}

fn write_table(out: &mut impl Write, records: &[&KbRecord]) -> io::Result<()> {
    writeln!(out, "{:<28} {:<12} {:>8}  {:<30} summary", "cluster", "facet", "score", "concepts")?;
    for r in records {
        let concepts: Vec<&str> = r.concepts.iter().map(|c| c.phrase.as_str()).collect();
        let mut concepts = concepts.join(", ");
        if concepts.chars().count() > 30 {
            concepts = concepts.chars().take(27).collect::<String>() + "...";
        }
        writeln!(out, "{:<28} {:<12} {:>8.4}  {:<30} {}", r.cluster_id, r.facet.as_str(), r.feature_scores.combined, concepts, r.summary)?;
    }
    Ok(())
}

fn query(args: QueryArgs) -> Result<(), Failure> {
    let path = match (&args.kb, &args.config) {
        (Some(kb), _) => kb.clone(),
        (None, Some(c)) => load_config(c)?.kb_path(),
        (None, None) => unreachable!("clap requires --kb or --config"),
    };
    let index = KbIndex::load(&path).with_context(|| format!("loading {}", path.display())).map_err(stage_failure)?;
    let q = KbQuery {
        subject: args.subject.map(|s| s.as_str().into()),
        facet: args.facet.map(|f| f.as_str().into()),
        concept: args.concept,
        min_score: args.min_score,
    };
    let mut hits = index.query(&q);
    if let Some(n) = args.limit {
        hits.truncate(n);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let written = match args.format {
        Format::Jsonl => hits.iter().try_for_each(|r| {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out).map_err(serde_json::Error::io)
        }).map_err(io::Error::from),
        Format::Table => write_table(&mut out, &hits),
    };
    match written {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(stage_failure),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, stages } => run(&config, stages),
        Command::Kb { command: KbCommand::Query(args) } => query(args),
        Command::ValidateConfig { config } => validate(&config),
        Command::Report { config } => report(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
