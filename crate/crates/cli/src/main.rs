//! `refann`: import hints, serve the annotation API, validate, export and
//! measure agreement from the command line.

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use refann_core::storage::{to_canonical_string, DATA_DIR_ENV, DEFAULT_DATA_DIR};
use refann_core::{CommitSource, RefactoringTypeDefinition, Status, Store, Workbench};
use serde_json::json;

#[derive(Parser)]
#[command(name = "refann", version, about = "Annotate refactorings in commits and curate the resulting dataset")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Store directory.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = DEFAULT_DATA_DIR)]
    data_dir: PathBuf,
    /// Git clone that commits named in hints are loaded from.
    #[arg(long, global = true)]
    repo: Option<PathBuf>,
    /// Directory of before/after fixtures to resolve commits from; repeatable.
    #[arg(long, global = true)]
    fixtures: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Create one Draft annotation per hint.
    Import {
        hints: PathBuf,
        #[arg(long, default_value = "importer")]
        annotator: String,
    },
    /// Load a previously exported dataset into the store.
    ImportDataset { dataset: PathBuf },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = refann_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Allowed browser origin, or `*`.
        #[arg(long, env = refann_service::CORS_ENV)]
        cors_origin: Option<String>,
    },
    /// Re-check every stored annotation against its schema and the code.
    Validate,
    /// Write the curated dataset.
    Export {
        #[arg(long)]
        status: Option<Status>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Inter-annotator agreement over every instance with two or more annotators.
    Agreement {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Manage refactoring type definitions.
    Types {
        #[command(subcommand)]
        action: TypesAction,
    },
    /// Manage fixture commits.
    Fixture {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum TypesAction {
    List,
    Add { file: PathBuf },
}

#[derive(Subcommand)]
enum FixtureAction {
    /// Store the commit described by a before/after fixture directory.
    Load { dir: PathBuf },
}

/// Failure that should exit 1 after its own output was already printed.
#[derive(Debug, thiserror::Error)]
#[error("{count} violation(s) found")]
struct ViolationsFound {
    count: usize,
}

macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(io::stdout(), $($arg)*)?
    };
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print().ok();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            e.print().ok();
            let rendered = e.render().to_string();
            let message = rendered.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", json!({"error": "Usage", "message": message}));
            return ExitCode::from(2);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = e
                .downcast_ref::<refann_core::Error>()
                .map(|c| c.code())
                .or_else(|| e.downcast_ref::<ViolationsFound>().map(|_| "ViolationsFound"))
                .or_else(|| e.downcast_ref::<refann_service::ServiceError>().map(service_code))
                .or_else(|| e.root_cause().downcast_ref::<io::Error>().map(|_| "Io"))
                .unwrap_or("Error");
            eprintln!("{}", json!({"error": code, "message": format!("{e:#}")}));
            ExitCode::FAILURE
        }
    }
}

fn service_code(e: &refann_service::ServiceError) -> &'static str {
    match e {
        refann_service::ServiceError::PortInUse(_) => "PortInUse",
        refann_service::ServiceError::InvalidOrigin(_) => "InvalidOrigin",
        refann_service::ServiceError::Io(_) => "Io",
    }
}

fn workbench(global: &Global) -> Result<Workbench> {
    let store = Store::open(&global.data_dir)
        .map_err(refann_core::Error::from)
        .with_context(|| format!("opening store {}", global.data_dir.display()))?;
    let mut wb = Workbench::new(store);
    wb.set_source(CommitSource { repo: global.repo.clone(), fixtures: global.fixtures.clone() });
    Ok(wb)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(cli: Cli) -> Result<()> {
    let wb = workbench(&cli.global)?;
    match cli.command {
        Command::Import { hints, annotator } => {
            let report = wb.import_hints(&read(&hints)?, &annotator)?;
            for w in &report.warnings {
                eprintln!("{}", json!({"warning": w.message, "hint": w.hint}));
            }
            out!("{} annotations created", report.created.len());
        }
        Command::ImportDataset { dataset } => {
            let created = wb.import_dataset(&read(&dataset)?)?;
            out!("{} annotations imported", created.len());
        }
        Command::Serve { port, host, cors_origin } => serve(wb, SocketAddr::new(host, port), cors_origin)?,
        Command::Validate => {
            let violations = wb.validate_all()?;
            for v in &violations {
                out!("{}", serde_json::to_string(v)?);
            }
            if !violations.is_empty() {
                return Err(ViolationsFound { count: violations.len() }.into());
            }
            out!("{} annotations valid", wb.annotations()?.len());
        }
        Command::Export { status, output } => {
            emit(output.as_deref(), &wb.export_dataset(status)?.to_canonical_json())?;
        }
        Command::Agreement { output } => {
            emit(output.as_deref(), &to_canonical_string(&wb.agreement()?)?)?;
        }
        Command::Types { action: TypesAction::List } => {
            for def in wb.registry()?.types() {
                out!("{}", serde_json::to_string(&def.to_json_value())?);
            }
        }
        Command::Types { action: TypesAction::Add { file } } => {
            let def = RefactoringTypeDefinition::from_json(&read(&file)?).map_err(refann_core::Error::from)?;
            let stored = wb.register_type(def)?;
            out!("type {} registered", stored.name);
        }
        Command::Fixture { action: FixtureAction::Load { dir } } => {
            let commit = wb.ingest_fixture(&dir)?;
            out!("{}", commit.id());
        }
    }
    Ok(())
}

fn serve(wb: Workbench, addr: SocketAddr, cors_origin: Option<String>) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let router = refann_service::router(Arc::new(wb), cors_origin.as_deref())?;
        let listener = refann_service::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        refann_service::serve(listener, router, async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await?;
        Ok(())
    })
}
