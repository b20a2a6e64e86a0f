//! `chemvis`: headless driver for ingestion, recommendation and comparison.
//!
//! Machine output goes to stdout, diagnostics to stderr. Exit status is 0 on
//! success, 2 for usage or input errors, 1 for internal failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chemvis_core::api::{to_json_body, ApiError, ComparisonResponse, EntityRow, RecommendationRow};
use chemvis_core::app::{parse_doc_id, ChemVis, DEFAULT_K};
use chemvis_core::config::ServiceConfig;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chemvis", version, about = "Chemistry-aware paper recommender")]
struct Cli {
    /// TOML config file (defaults to $CHEMVIS_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus store directory (overrides config and $CHEMVIS_STORE)
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest documents and print their ids, one per line
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// xml or plaintext; inferred from the extension when omitted
        #[arg(long)]
        format: Option<String>,
        /// Title overriding any found in the document
        #[arg(long)]
        title: Option<String>,
        /// Print `{"id": ...}` bodies instead of bare ids
        #[arg(long)]
        json: bool,
    },
    /// List the entities of a document
    Entities {
        id: String,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Rank the other documents of the corpus against one
    Recommend {
        id: String,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        w_entity: Option<f64>,
        #[arg(long)]
        w_text: Option<f64>,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Align the entities of two documents
    Compare {
        input: String,
        candidate: String,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Rebuild derived data from stored sections and report drift
    Reindex,
    /// Run the HTTP service
    Serve {
        /// Listen address (overrides config and $CHEMVIS_LISTEN)
        #[arg(long)]
        listen: Option<String>,
    },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn format_for(path: &Path, explicit: Option<&str>) -> String {
    if let Some(f) = explicit {
        return f.to_string();
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("xml") => "xml".into(),
        _ => "plaintext".into(),
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), T::to_string)
}

fn entities_table(rows: &[EntityRow]) -> String {
    let mut out = String::from("key\tcid\tname\tformula\tweight\tfrequency\tstatus\n");
    for r in rows {
        let e = &r.entity;
        let status = if e.is_resolved() { "resolved" } else { "unresolved" };
        out += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            e.key,
            opt(&e.cid),
            e.display_name,
            opt(&e.formula),
            opt(&e.weight),
            r.frequency,
            status
        );
    }
    out
}

fn recommend_table(rows: &[RecommendationRow]) -> String {
    let mut out = String::from("rank\tcandidate\tscore\tentity\ttext\ttitle\n");
    for (i, r) in rows.iter().enumerate() {
        let rec = &r.recommendation;
        out += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            i + 1,
            rec.candidate,
            rec.score,
            rec.entity_component,
            rec.text_component,
            r.title
        );
    }
    out
}

fn compare_table(cmp: &ComparisonResponse) -> String {
    let mut out = format!(
        "input\t{}\tcandidate\t{}\tentity_similarity\t{}\n",
        cmp.input, cmp.candidate, cmp.entity_similarity
    );
    out += "shade\tmatched\tfreq_input\tfreq_candidate\tkey\tname\tformula\tweight\n";
    for r in &cmp.rows {
        out += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.shade,
            r.matched,
            r.freq_input,
            r.freq_candidate,
            r.entity.key,
            r.entity.display_name,
            opt(&r.entity.formula),
            opt(&r.entity.weight)
        );
    }
    out
}

fn emit<T: serde::Serialize>(format: OutputFormat, value: &T, table: impl FnOnce(&T) -> String) {
    match format {
        OutputFormat::Json => print!("{}", to_json_body(value)),
        OutputFormat::Table => print!("{}", table(value)),
    }
}

fn load_config(cli: &Cli) -> Result<ServiceConfig, Failure> {
    let mut config =
        ServiceConfig::load(cli.config.as_deref()).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(store) = &cli.store {
        config.store_dir = store.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = load_config(&cli)?;
    if let Command::Serve { listen } = cli.command {
        if let Some(listen) = listen {
            config.listen = listen;
        }
        let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
        return runtime
            .block_on(chemvis_service::serve(config))
            .map_err(|e| Failure::Internal(e.to_string()));
    }
    let app = ChemVis::open(config)?;
    match cli.command {
        Command::Ingest {
            paths,
            format,
            title,
            json,
        } => {
            for path in &paths {
                let bytes = std::fs::read(path)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                let fmt = format_for(path, format.as_deref());
                let created = app
                    .ingest(&bytes, &fmt, title.as_deref())
                    .map_err(|e| match Failure::from(e) {
                        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
                        other => other,
                    })?;
                if json {
                    print!("{}", to_json_body(&created));
                } else {
                    println!("{}", created.id);
                }
            }
        }
        Command::Entities { id, format } => {
            let rows = app.entities(parse_doc_id(&id)?)?;
            emit(format, &rows, |r| entities_table(r));
        }
        Command::Recommend {
            id,
            k,
            w_entity,
            w_text,
            format,
        } => {
            let id = parse_doc_id(&id)?;
            app.entities(id)?;
            let weights = app.weights(w_entity, w_text)?;
            let rows = app.recommend(id, k, weights)?;
            emit(format, &rows, |r| recommend_table(r));
        }
        Command::Compare {
            input,
            candidate,
            format,
        } => {
            let cmp = app.compare(parse_doc_id(&input)?, parse_doc_id(&candidate)?)?;
            emit(format, &cmp, compare_table);
        }
        Command::Reindex => {
            let report = app.reindex()?;
            for line in &report.drift {
                eprintln!("drift: {line}");
            }
            println!(
                "{} documents, {} terms, {} drift findings",
                report.documents,
                report.terms,
                report.drift.len()
            );
        }
        Command::Serve { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("chemvis: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("chemvis: internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
