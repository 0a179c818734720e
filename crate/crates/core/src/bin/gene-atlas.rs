//! Operator CLI. Every invocation prints one JSON document on stdout; exit
//! status is 0 on success, 1 on operational errors and 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use gene_atlas::annotation::{
    compare_drafts, ingest_record, resolve, AnnotationDraft, AnnotationError, Decisions, RecordMeta, Side,
};
use gene_atlas::api::{self, ServeConfig, ServeError};
use gene_atlas::color::{extract_profile, ColorError, ColorParams, PixelBuffer};
use gene_atlas::explore::{ExploreError, GeneIndex, PageRequest, MAX_PAGE_SIZE};
use gene_atlas::narrative::{
    assemble_prompt, generate, validate_scaffold, CoCreationRequest, GenerateOptions, NarrativeError, PromptTemplate,
    ProviderRegistry, RemoteConfig, RemoteProvider, Theme,
};
use gene_atlas::schema::{taxonomy, vocabulary_document, GeneTag, InnerConcept, SchemaError};
use gene_atlas::store::{Corpus, Snapshot, Store, StoreError};
use gene_atlas::synth::synthetic_corpus;

#[derive(Debug, Parser)]
#[command(name = "gene-atlas", version, about = "Cultural-gene costume collection platform")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cross-check two annotation drafts and add the reconciled record.
    Ingest {
        #[arg(long)]
        data_dir: PathBuf,
        /// Record identity and metadata (JSON).
        #[arg(long)]
        meta: PathBuf,
        /// Source text the coders transcribed.
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        draft_a: PathBuf,
        #[arg(long)]
        draft_b: PathBuf,
        /// Third-coder choices: {"field.path": "A" | "B"}.
        #[arg(long)]
        decisions: Option<PathBuf>,
        /// Costume image; the first one sets the color profile.
        #[arg(long)]
        image: Vec<PathBuf>,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Extract the dominant-color profile of an image.
    Colors {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List costumes carrying a tag such as `Form:Hat`.
    Browse {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, value_parser = parse_tag)]
        tag: GeneTag,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        page: u64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=MAX_PAGE_SIZE as u64))]
        page_size: u64,
    },
    /// Keyword search over titles, groups, regions, motifs and tag names.
    Search {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, value_parser = non_blank)]
        q: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        page: u64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..=MAX_PAGE_SIZE as u64))]
        page_size: u64,
    },
    /// Assemble a scaffolded prompt, generate a story and log the artifact.
    Generate {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long)]
        costume: String,
        #[arg(long, value_parser = parse_theme)]
        theme: Theme,
        #[arg(long, value_parser = parse_concept)]
        concept: InnerConcept,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        note: Option<String>,
        #[arg(long, default_value = "mock", value_parser = ["mock", "remote"])]
        provider: String,
        /// Endpoint for the remote provider.
        #[arg(long, required_if_eq("provider", "remote"))]
        endpoint: Option<String>,
        /// Prompt template document replacing the default.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        user: Option<String>,
    },
    /// Serve the HTTP API until interrupted.
    Serve {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Enables provider `remote` at this endpoint.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Replace the data directory with the deterministic synthetic corpus.
    SeedCorpus {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the vocabularies, or one of them.
    Taxonomy {
        #[arg(long)]
        category: Option<String>,
    },
}

fn parse_tag(s: &str) -> Result<GeneTag, String> {
    s.parse().map_err(|e: SchemaError| e.to_string())
}

fn parse_theme(s: &str) -> Result<Theme, String> {
    s.parse().map_err(|e: NarrativeError| e.to_string())
}

fn parse_concept(s: &str) -> Result<InnerConcept, String> {
    InnerConcept::parse(s).map_err(|e| e.to_string())
}

fn non_blank(s: &str) -> Result<String, String> {
    if s.trim().is_empty() {
        Err("query must not be empty".into())
    } else {
        Ok(s.to_string())
    }
}

/// Operational failure carrying extra JSON for the error document.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
struct Reported {
    code: &'static str,
    message: String,
    details: Value,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_template(path: Option<&Path>) -> Result<PromptTemplate> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Ok(PromptTemplate::from_json(&text).with_context(|| format!("invalid template {}", p.display()))?)
        }
        None => Ok(PromptTemplate::default()),
    }
}

fn page(page: u64, size: u64) -> Result<PageRequest> {
    Ok(PageRequest::new(page as usize, size as usize)?)
}

fn index_of(data_dir: &Path) -> Result<GeneIndex> {
    let snapshot = Snapshot::load(data_dir)?;
    Ok(GeneIndex::build(snapshot.corpus.records())?)
}

#[allow(clippy::too_many_arguments)]
fn ingest(
    data_dir: &Path,
    meta: &Path,
    text: &Path,
    draft_a: &Path,
    draft_b: &Path,
    decisions: Option<&Path>,
    images: &[PathBuf],
    params: ColorParams,
) -> Result<()> {
    let mut meta: RecordMeta =
        serde_json::from_value(read_json(meta)?).with_context(|| format!("invalid metadata {}", meta.display()))?;
    let source_text = fs::read_to_string(text).with_context(|| format!("cannot read {}", text.display()))?;
    let a = AnnotationDraft::from_value(&read_json(draft_a)?, Side::A)?;
    let b = AnnotationDraft::from_value(&read_json(draft_b)?, Side::B)?;
    let report = compare_drafts(&a, &b)?;

    let decisions: Decisions = match decisions {
        Some(p) => {
            serde_json::from_value(read_json(p)?).with_context(|| format!("invalid decisions {}", p.display()))?
        }
        None => Decisions::new(),
    };
    let merged = match resolve(&report, &a, &b, &decisions) {
        Ok(m) => m,
        Err(AnnotationError::MissingDecisions(paths)) => {
            return Err(Reported {
                code: "unresolved_conflicts",
                message: format!("{} conflicting field(s) need a decision", paths.len()),
                details: json!({ "report": report, "undecided": paths }),
            }
            .into())
        }
        Err(e) => return Err(e.into()),
    };

    let pixels = images.iter().map(|p| PixelBuffer::decode_file(p)).collect::<Result<Vec<_>, _>>()?;
    for path in images {
        let reference = path.display().to_string();
        if !meta.image_refs.contains(&reference) {
            meta.image_refs.push(reference);
        }
    }
    let mut store = Store::open(data_dir)?;
    let record = ingest_record(store.corpus(), &source_text, meta, &pixels, merged, &params)?;
    store.insert_record(record.clone())?;
    print(&json!({ "report": report, "record": record }))
}

#[allow(clippy::too_many_arguments)]
fn generate_cmd(
    data_dir: &Path,
    request: CoCreationRequest,
    provider: &str,
    endpoint: Option<String>,
    template: Option<&Path>,
    user: Option<String>,
) -> Result<()> {
    let template = load_template(template)?;
    let mut registry = ProviderRegistry::with_mock();
    if let Some(endpoint) = endpoint {
        registry
            .register(std::sync::Arc::new(RemoteProvider::new(RemoteConfig { endpoint, ..RemoteConfig::default() })));
    }
    let provider = registry.get(provider)?;
    let mut store = Store::open(data_dir)?;
    let record = store
        .corpus()
        .get(&request.costume_id)
        .ok_or_else(|| StoreError::UnknownCostume(request.costume_id.clone()))?;
    let prompt = assemble_prompt(record, &request, &template)?;
    let artifact = generate(provider.as_ref(), &prompt, &request, &GenerateOptions::default())?;
    let scaffold = validate_scaffold(&artifact, &prompt);
    let artifact_id = store.append_artifact(artifact.clone(), user)?;
    print(&json!({ "artifact_id": artifact_id, "artifact": artifact, "scaffold": scaffold }))
}

fn serve(config: ServeConfig) -> Result<()> {
    let handle = api::spawn(config)?;
    print(&json!({ "listening": handle.base_url() }))?;
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    runtime.block_on(async {
        let _ = tokio::signal::ctrl_c().await;
    });
    handle.shutdown()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { data_dir, meta, text, draft_a, draft_b, decisions, image, k, seed } => {
            let params = ColorParams { k: k as usize, seed, ..ColorParams::default() };
            ingest(&data_dir, &meta, &text, &draft_a, &draft_b, decisions.as_deref(), &image, params)
        }
        Command::Colors { image, k, seed } => {
            let buffer = PixelBuffer::decode_file(&image)?;
            let params = ColorParams { k: k as usize, seed, ..ColorParams::default() };
            print(&extract_profile(&buffer.pixels(), &params)?)
        }
        Command::Browse { data_dir, tag, page: p, page_size } => {
            let page = page(p, page_size)?;
            print(&index_of(&data_dir)?.browse_by_tag(tag, page))
        }
        Command::Search { data_dir, q, page: p, page_size } => {
            let page = page(p, page_size)?;
            print(&index_of(&data_dir)?.search_keyword(&q, page)?)
        }
        Command::Generate { data_dir, costume, theme, concept, seed, note, provider, endpoint, template, user } => {
            let mut request = CoCreationRequest::new(costume, theme, concept, seed);
            request.user_note = note;
            generate_cmd(&data_dir, request, &provider, endpoint, template.as_deref(), user)
        }
        Command::Serve { data_dir, host, port, endpoint, template } => {
            let mut config = ServeConfig::new(data_dir);
            config.host = host;
            config.port = port;
            config.remote = endpoint.map(|endpoint| RemoteConfig { endpoint, ..RemoteConfig::default() });
            config.template = load_template(template.as_deref())?;
            serve(config)
        }
        Command::SeedCorpus { data_dir, n, seed } => {
            let corpus = Corpus::from_records(synthetic_corpus(n, seed))?;
            let mut store = Store::open(&data_dir)?;
            store.reset(corpus)?;
            print(&json!({
                "data_dir": data_dir.display().to_string(),
                "records": store.corpus().len(),
                "version": store.corpus().version(),
            }))
        }
        Command::Taxonomy { category } => match category {
            Some(c) => print(&json!({ "category": c, "values": taxonomy(&c)? })),
            None => print(&vocabulary_document()),
        },
    }
}

/// Machine-readable code for the first recognised error in the chain.
fn code_of(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(r) = cause.downcast_ref::<Reported>() {
            return r.code;
        }
        if let Some(e) = cause.downcast_ref::<StoreError>() {
            return match e {
                StoreError::LockHeld(_) => "lock_held",
                StoreError::Malformed { .. } => "malformed_document",
                StoreError::UnsupportedFormat { .. } => "unsupported_format",
                StoreError::DuplicateId(_) => "duplicate_id",
                StoreError::UnknownCostume(_) => "unknown_costume",
                StoreError::EmptyUserId => "invalid_request",
                StoreError::Io { .. } | StoreError::Json(_) => "storage_error",
            };
        }
        if let Some(e) = cause.downcast_ref::<AnnotationError>() {
            return match e {
                AnnotationError::CostumeMismatch { .. } => "costume_mismatch",
                AnnotationError::InvalidDraft { .. } | AnnotationError::MalformedDraft(_) => "invalid_draft",
                AnnotationError::MissingDecisions(_) => "unresolved_conflicts",
                AnnotationError::StaleReport => "stale_report",
                AnnotationError::DuplicateId(_) => "duplicate_id",
                AnnotationError::Invalid(_) => "invalid_record",
                AnnotationError::Color(_) => "color_error",
            };
        }
        if let Some(e) = cause.downcast_ref::<NarrativeError>() {
            return api::ApiError::from(e).code;
        }
        if let Some(e) = cause.downcast_ref::<ExploreError>() {
            return api::ApiError::from(e.clone()).code;
        }
        if let Some(e) = cause.downcast_ref::<SchemaError>() {
            return api::ApiError::from(e.clone()).code;
        }
        if let Some(e) = cause.downcast_ref::<ColorError>() {
            return match e {
                ColorError::Decode { .. } => "decode_error",
                _ => "color_error",
            };
        }
        if let Some(e) = cause.downcast_ref::<ServeError>() {
            return match e {
                ServeError::Store(StoreError::LockHeld(_)) => "lock_held",
                ServeError::Bind { .. } => "bind_error",
                _ => "serve_error",
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "invalid_input";
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io_error";
        }
    }
    "error"
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let reason = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid usage");
            eprintln!("{}", reason.trim());
            return ExitCode::from(2);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = code_of(&err);
            let message = format!("{err:#}");
            let mut doc = json!({ "code": code, "message": message });
            if let Some(details) = err.downcast_ref::<Reported>().map(|r| r.details.clone()) {
                if let (Value::Object(doc), Value::Object(extra)) = (&mut doc, details) {
                    doc.extend(extra);
                }
            }
            if let Some(AnnotationError::InvalidDraft { violations, .. } | AnnotationError::Invalid(violations)) =
                err.downcast_ref::<AnnotationError>()
            {
                doc["violations"] = json!(violations);
            }
            println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
