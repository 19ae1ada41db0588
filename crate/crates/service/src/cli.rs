//! `csc` command line: ingestion, training, scripted runs and the server.

use std::collections::HashSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use csc_core::assets::load_resources;
use csc_core::brief::DesignBrief;
use csc_core::embedding::load_embeddings;
use csc_core::engine::{Engine, Session};
use csc_core::graph::{HttpTransport, LocalGraph, RemoteGraph};
use csc_core::policy::{run_top1, PolicyError};
use csc_core::scoring::{train_word_scorer, LabeledLexicon, TrainConfig, WordScorerModel};
use serde_json::json;

use crate::config::ServiceConfig;
use crate::http::{router, AppState};
use crate::store::SessionStore;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "csc", version, about = "Build a character space and design-concept phrases from a design brief")]
pub struct Cli {
    /// Config file (default: $CSC_CONFIG, then ./csc.toml).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a binary cache from an embedding file or assertion dump.
    #[command(subcommand)]
    Ingest(Ingest),
    /// Fit the word usefulness model and print the cross-validation report.
    Train(TrainArgs),
    /// Run a whole session non-interactively and print the character space.
    Run(RunArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum Ingest {
    Embeddings {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Keep only the terms listed in this file (one per line).
        #[arg(long)]
        filter: Option<PathBuf>,
    },
    Graph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "en")]
        language: String,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 200)]
    pub max_rounds: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Also write the full report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    /// Always take the top-ranked option.
    Top1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub brief_file: PathBuf,
    #[arg(long, value_enum, default_value_t = Policy::Top1)]
    pub policy: Policy,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Overrides the configured listen address.
    #[arg(long)]
    pub listen: Option<String>,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn data_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.to_string(),
    }
}

/// Parses `args` and runs the command, returning the exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest(Ingest::Embeddings { input, output, filter }) => ingest_embeddings(&input, &output, filter.as_deref(), out),
        Command::Ingest(Ingest::Graph { input, output, language }) => ingest_graph(&input, &output, &language, out),
        Command::Train(args) => train(&args, out),
        Command::Run(args) => {
            let config = load_config(cli.config.as_deref())?;
            run(&config, &args, out)
        }
        Command::Serve(args) => {
            let mut config = load_config(cli.config.as_deref())?;
            if let Some(listen) = args.listen {
                config.listen = listen;
            }
            serve(config)
        }
    }
}

fn load_config(explicit: Option<&Path>) -> Result<ServiceConfig, Failure> {
    let path = ServiceConfig::locate(explicit);
    ServiceConfig::load(&path).map_err(data_error)
}

fn ingest_embeddings(input: &Path, output: &Path, filter: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let filter = match filter {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| data_error(format!("{}: {e}", p.display())))?
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect::<HashSet<String>>(),
        ),
        None => None,
    };
    let (index, report) = load_embeddings(input, filter.as_ref()).map_err(data_error)?;
    index.write_cache(output).map_err(data_error)?;
    let _ = writeln!(
        out,
        "embeddings: {} terms, dim {}, {} records, {} malformed, {} duplicates, {} filtered, {} other-language -> {}",
        index.len(),
        index.dim(),
        report.records,
        report.malformed,
        report.duplicates,
        report.filtered,
        report.other_language,
        output.display()
    );
    Ok(())
}

fn ingest_graph(input: &Path, output: &Path, language: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let (graph, report) = LocalGraph::ingest(input, language).map_err(data_error)?;
    graph.write_cache(output).map_err(data_error)?;
    let _ = writeln!(
        out,
        "graph: {} rows, {} kept, {} other-language, {} multiword, {} malformed -> {}",
        report.rows,
        report.kept,
        report.dropped_language,
        report.dropped_multiword,
        report.malformed,
        output.display()
    );
    Ok(())
}

fn train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let lexicon = LabeledLexicon::load(&args.lexicon).map_err(data_error)?;
    let (index, _) = load_embeddings(&args.embeddings, None).map_err(data_error)?;
    let config = TrainConfig {
        max_depth: args.max_depth,
        learning_rate: args.learning_rate,
        max_rounds: args.max_rounds,
        folds: args.folds,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let (model, report) = train_word_scorer(&lexicon, &index, &config).map_err(data_error)?;
    model.save(&args.output).map_err(data_error)?;
    let _ = writeln!(out, "records: {}", report.records);
    if !report.dropped.is_empty() {
        let _ = writeln!(out, "dropped (no embedding): {}", report.dropped.join(", "));
    }
    let _ = writeln!(out, "base score: {:.6}", model.base_score);
    let _ = writeln!(out, "trees: {}", model.trees.len());
    if report.mean_rmse.is_empty() {
        let _ = writeln!(out, "constant labels: no cross-validation needed");
    } else {
        let _ = writeln!(out, "cv rmse at round 0: {:.6}", report.mean_rmse[0]);
        let _ = writeln!(out, "best rounds: {} (cv rmse {:.6})", report.best_rounds, report.best_cv_rmse);
    }
    if let Some(last) = report.train_rmse.last() {
        let _ = writeln!(out, "train rmse: {last:.6}");
    }
    let _ = writeln!(out, "model: {}", args.output.display());
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).map_err(data_error)?;
        std::fs::write(path, text).map_err(|e| data_error(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Loads assets and builds the engine described by `config`.
pub fn build_engine(config: &ServiceConfig) -> Result<Engine, Failure> {
    let remote = match &config.remote {
        Some(r) => {
            let transport = HttpTransport::new(Duration::from_millis(r.timeout_ms)).map_err(data_error)?;
            Some(RemoteGraph::new(r.client_config(), Arc::new(transport)))
        }
        None => None,
    };
    let resources = load_resources(&config.assets, remote).map_err(data_error)?;
    let engine_config = config.engine_config().map_err(data_error)?;
    Ok(Engine::new(Arc::new(resources), engine_config))
}

fn run(config: &ServiceConfig, args: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.brief_file)
        .map_err(|e| data_error(format!("brief file {}: {e}", args.brief_file.display())))?;
    let engine = build_engine(config)?;
    let brief = DesignBrief::new(text).map_err(data_error)?;
    let session = match args.policy {
        Policy::Top1 => run_top1(&engine, brief).map_err(|e| match e {
            PolicyError::Stalled { .. } => data_error(e),
            PolicyError::Engine(e) => data_error(e),
        })?,
    };
    let rendered = match args.format {
        Format::Text => render_text(&session),
        Format::Json => {
            let v = json!({
                "session_id": session.id,
                "query_words": session.query_words,
                "w1_pool": session.w1_pool,
                "chosen_phrase": session.chosen_phrase,
                "character_space": session.character_space,
                "explanation": session.explanation(),
            });
            serde_json::to_string_pretty(&v).map_err(data_error)? + "\n"
        }
    };
    out.write_all(rendered.as_bytes()).map_err(data_error)
}

/// Plain `key: value` rendering of a completed session.
pub fn render_text(session: &Session) -> String {
    let mut s = String::new();
    let cs = session.character_space.as_ref();
    let field = |s: &mut String, k: &str, v: &str| {
        s.push_str(k);
        s.push_str(": ");
        s.push_str(v);
        s.push('\n');
    };
    field(&mut s, "session", &session.id);
    field(&mut s, "query_words", &session.query_words.join(", "));
    field(&mut s, "w1_pool", &session.w1_pool.join(", "));
    if let Some(p) = &session.chosen_phrase {
        field(
            &mut s,
            "phrase",
            &format!("{} (similarity {:.6}, score {:.2})", p.display, p.similarity, p.score),
        );
    }
    if let Some(cs) = cs {
        field(&mut s, "w1", &cs.w1);
        field(&mut s, "w2", &format!("{} ({})", cs.w2, cs.w2_noun));
        field(&mut s, "w3", &cs.w3);
        field(&mut s, "w4", &cs.w4);
        field(&mut s, "quadrant.target", &cs.quadrant_labels.target);
        field(&mut s, "quadrant.w2_w3", &cs.quadrant_labels.w2_w3);
        field(&mut s, "quadrant.w3_w4", &cs.quadrant_labels.w3_w4);
        field(&mut s, "quadrant.w4_w1", &cs.quadrant_labels.w4_w1);
        field(&mut s, "explanation", &cs.explanation());
    }
    s
}

/// Health document: service version plus what each asset contains.
pub fn health_info(engine: &Engine, config: &ServiceConfig) -> serde_json::Value {
    let r = engine.resources();
    let graph = r.graph.local_index();
    let model = WordScorerModel::load(&config.assets.model).ok();
    json!({
        "status": "ok",
        "service": "csc",
        "version": env!("CARGO_PKG_VERSION"),
        "assets": {
            "embeddings": { "source": r.index.source_id(), "terms": r.index.len(), "dim": r.index.dim() },
            "graph": {
                "source": graph.map(|g| g.source_id().to_string()),
                "assertions": graph.map(|g| g.assertion_count()),
                "remote": config.remote.as_ref().map(|x| x.endpoint.clone()),
            },
            "model": { "trees": model.as_ref().map(|m| m.trees.len()), "dim": model.as_ref().map(|m| m.dim) },
            "stopwords": r.stopwords.version,
        },
    })
}

/// Loads everything the server needs.
pub fn app_state(config: &ServiceConfig) -> Result<AppState, Failure> {
    let engine = build_engine(config)?;
    let store = SessionStore::open(&config.session_store, &engine).map_err(data_error)?;
    Ok(AppState {
        health: health_info(&engine, config),
        engine,
        store: Arc::new(store),
        auth_token: config.auth_token.clone(),
    })
}

fn serve(config: ServiceConfig) -> Result<(), Failure> {
    init_logging(&config.log_level);
    let addr = config.listen_addr().map_err(data_error)?;
    let state = app_state(&config)?;
    tracing::info!(sessions = state.store.len(), "session store loaded");
    let runtime = tokio::runtime::Runtime::new().map_err(data_error)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| data_error(format!("bind {addr}: {e}")))?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(data_error)
    })
}

fn init_logging(level: &str) {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .or_else(|_| tracing_subscriber::EnvFilter::try_new(level))
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}
