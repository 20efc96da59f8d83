use clap::{Parser, Subcommand};
use rayon::prelude::*;
use retroplan_core::settings::{
    load_corpus, load_templates, Settings, SettingsError, BUYABLES_SNAPSHOT, CORPUS_OVERLAY, TEMPLATES_OVERLAY,
};
use retroplan_core::{search, Catalog, CatalogFormat, SearchContext, SearchResult};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_FAILURE: u8 = 1;
const EXIT_MISSING_FILE: u8 = 2;
const EXIT_BAD_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "retroplan", version, about = "Retrosynthesis planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tree search for every target and write one document each.
    Plan {
        /// One SMILES per line; blank lines and lines starting with '#' are skipped.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parallel searches. Defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a catalog file; with --config, merge it into the data directory.
    ImportBuyables {
        file: PathBuf,
        /// csv or jsonl; guessed from the extension when absent.
        #[arg(long)]
        format: Option<CatalogFormat>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a template file; with --config, merge it into the data directory.
    ImportTemplates {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a precedent reaction file; with --config, merge it into the data directory.
    ImportCorpus {
        file: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

/// An error with the exit code it maps to.
struct Failure(u8, String);

impl Failure {
    fn settings(e: SettingsError) -> Self {
        match e {
            SettingsError::Io { .. } => Failure(EXIT_MISSING_FILE, e.to_string()),
            _ => Failure(EXIT_BAD_CONFIG, e.to_string()),
        }
    }
}

fn load_settings(path: &Path) -> Result<Settings, Failure> {
    if !path.exists() {
        return Err(Failure(EXIT_MISSING_FILE, format!("{}: no such file", path.display())));
    }
    let mut s = Settings::load(path).map_err(Failure::settings)?;
    s.apply_env(|k| std::env::var(k).ok()).map_err(Failure::settings)?;
    Ok(s)
}

#[derive(Serialize)]
struct TargetDocument<'a> {
    target: &'a str,
    solved: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<SearchResult>,
}

fn plan(targets: &Path, config: &Path, out: &Path, jobs: Option<usize>) -> Result<(), Failure> {
    let settings = load_settings(config)?;
    let text = std::fs::read_to_string(targets)
        .map_err(|e| Failure(EXIT_MISSING_FILE, format!("{}: {e}", targets.display())))?;
    let stores = settings.load_stores().map_err(Failure::settings)?;
    let one_step = stores
        .one_step(&settings)
        .map_err(|e| Failure(EXIT_BAD_CONFIG, e.to_string()))?;
    std::fs::create_dir_all(out).map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", out.display())))?;
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    let view = stores.catalog.view(settings.search.max_price);
    let outcomes: Vec<Result<bool, String>> = pool.install(|| {
        lines
            .par_iter()
            .enumerate()
            .map(|(i, target)| {
                let t0 = Instant::now();
                let doc = match search(target, &settings.search, &SearchContext::new(&one_step, &view)) {
                    Ok(g) => {
                        let result = SearchResult::new(&g, None);
                        TargetDocument {
                            target,
                            solved: g.solved(),
                            error: None,
                            result: Some(result),
                        }
                    }
                    Err(e) => TargetDocument {
                        target,
                        solved: false,
                        error: Some(e.to_string()),
                        result: None,
                    },
                };
                let routes = doc.result.as_ref().map_or(0, |r| r.routes.len());
                let path = out.join(format!("target_{:04}.json", i + 1));
                let json = serde_json::to_vec_pretty(&doc).map_err(|e| e.to_string())?;
                std::fs::write(&path, json).map_err(|e| format!("{}: {e}", path.display()))?;
                let state = match (&doc.error, doc.solved) {
                    (Some(e), _) => format!("failed: {e}"),
                    (None, true) => format!("solved, {routes} routes"),
                    (None, false) => "unsolved".to_string(),
                };
                eprintln!("[{}] {target}: {state} ({:.2}s)", i + 1, t0.elapsed().as_secs_f64());
                Ok(doc.solved)
            })
            .collect()
    });
    let mut solved = 0;
    for o in &outcomes {
        match o {
            Ok(true) => solved += 1,
            Ok(false) => {}
            Err(e) => return Err(Failure(EXIT_FAILURE, e.clone())),
        }
    }
    println!("solved {solved}/{}", lines.len());
    Ok(())
}

fn data_dir(config: Option<&Path>) -> Result<Option<PathBuf>, Failure> {
    match config {
        None => Ok(None),
        Some(c) => {
            let s = load_settings(c)?;
            std::fs::create_dir_all(&s.data_dir)
                .map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", s.data_dir.display())))?;
            Ok(Some(s.data_dir))
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn missing(file: &Path) -> Result<(), Failure> {
    if file.exists() {
        Ok(())
    } else {
        Err(Failure(EXIT_MISSING_FILE, format!("{}: no such file", file.display())))
    }
}

fn import_buyables(file: &Path, format: Option<CatalogFormat>, config: Option<&Path>) -> Result<(), Failure> {
    missing(file)?;
    let fail = |e: retroplan_core::CatalogError| Failure(EXIT_FAILURE, format!("{}: {e}", file.display()));
    let format = match format {
        Some(f) => f,
        None => CatalogFormat::from_path(file).map_err(fail)?,
    };
    let text = std::fs::read_to_string(file).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    let mut incoming = Catalog::new();
    let n = incoming.import_str(&text, format).map_err(fail)?;
    if let Some(dir) = data_dir(config)? {
        let path = dir.join(BUYABLES_SNAPSHOT);
        let mut catalog = if path.exists() {
            Catalog::from_path(&path).map_err(fail)?
        } else {
            Catalog::new()
        };
        catalog.import_str(&text, format).map_err(fail)?;
        catalog
            .save(&path)
            .map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    }
    println!("{n} entries");
    Ok(())
}

fn import_templates(file: &Path, config: Option<&Path>) -> Result<(), Failure> {
    missing(file)?;
    let incoming = load_templates(file).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    if let Some(dir) = data_dir(config)? {
        let path = dir.join(TEMPLATES_OVERLAY);
        let mut store = if path.exists() {
            load_templates(&path).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?
        } else {
            Default::default()
        };
        store.merge(incoming.clone());
        write(&path, &store.to_jsonl())?;
    }
    println!("{} entries", incoming.len());
    Ok(())
}

fn import_corpus(file: &Path, config: Option<&Path>) -> Result<(), Failure> {
    missing(file)?;
    let incoming = load_corpus(file).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    if let Some(c) = config {
        let settings = load_settings(c)?;
        let stores = settings.load_stores().map_err(Failure::settings)?;
        incoming
            .validate(&stores.templates)
            .map_err(|e| Failure(EXIT_FAILURE, format!("{}: {e}", file.display())))?;
        let dir = data_dir(Some(c))?.expect("config given");
        let path = dir.join(CORPUS_OVERLAY);
        let mut corpus = if path.exists() {
            load_corpus(&path).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?
        } else {
            Default::default()
        };
        corpus.merge(incoming.clone());
        write(&path, &corpus.to_jsonl())?;
    }
    println!("{} entries", incoming.len());
    Ok(())
}

fn serve(config: &Path) -> Result<(), Failure> {
    let settings = load_settings(config)?;
    let state = retroplan_gateway::AppState::new(settings).map_err(|e| Failure(EXIT_BAD_CONFIG, e.to_string()))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    rt.block_on(async move {
        let shutdown = async {
            tokio::signal::ctrl_c().await.ok();
        };
        retroplan_gateway::serve(state, shutdown).await
    })
    .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Plan {
            targets,
            config,
            out,
            jobs,
        } => plan(targets, config, out, *jobs),
        Command::ImportBuyables { file, format, config } => import_buyables(file, *format, config.as_deref()),
        Command::ImportTemplates { file, config } => import_templates(file, config.as_deref()),
        Command::ImportCorpus { file, config } => import_corpus(file, config.as_deref()),
        Command::Serve { config } => serve(config),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
