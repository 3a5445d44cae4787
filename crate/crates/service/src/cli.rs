use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::api::{router, SnapshotHandle};
use crate::config::{ConfigError, PipelineConfig};
use crate::run::{self, RunError, RunReport};

pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "archive-lens", version, about = "Structure, annotate, index and serve digitised newspaper archives")]
pub struct Cli {
    /// Configuration file (falls back to $ARCHIVE_LENS_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for batch commands.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Log progress at info level.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// ALTO pages to DocBook and stand-off bundles.
    Ingest,
    /// Bundles to a new index snapshot.
    Index,
    /// Serve the JSON API over the current snapshot.
    Serve,
    /// Count collections, publications, pages, lines and words.
    Stats,
    /// Ingest, then index.
    All,
    /// Time the cleanup chain on a single worker.
    Bench {
        /// Passes over the manifest pages.
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
}

fn print_summary(report: &RunReport) {
    let c = &report.corpus;
    println!("collections   {:>10}", c.collections);
    println!("publications  {:>10}", c.publications);
    println!("pages         {:>10}", c.pages);
    println!("lines         {:>10}", c.lines);
    println!("words         {:>10}", c.words);
    if report.documents_indexed > 0 || report.snapshot.is_some() {
        println!("indexed       {:>10}", report.documents_indexed);
    }
    if let Some(b) = &report.bench {
        println!("lines/second  {:>10.0}  ({} lines in {:.3} s)", b.lines_per_second, b.lines, b.seconds);
    }
    for f in &report.failures {
        println!("FAILED {} [{}]: {}", f.doc_id, f.stage, f.message);
    }
}

fn exit_for(e: &RunError) -> i32 {
    match e {
        RunError::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Runs one command and returns the process exit status.
pub fn execute(cli: Cli) -> i32 {
    let cfg = match PipelineConfig::locate(cli.config.clone()).and_then(|p| PipelineConfig::load(&p)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let jobs = cli
        .jobs
        .or(cfg.pipeline.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    let result = match cli.command {
        Command::Serve => return serve_blocking(&cfg),
        Command::Ingest => run::ingest(&cfg, jobs),
        Command::Index => run::index(&cfg, jobs),
        Command::Stats => run::stats(&cfg, jobs),
        Command::All => run::all(&cfg, jobs),
        Command::Bench { rounds } => run::bench(&cfg, rounds),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    if let Err(e) = report.write(&cfg.report_path()) {
        eprintln!("error: {e}");
        return EXIT_RUNTIME;
    }
    print_summary(&report);
    info!("report written to {}", cfg.report_path().display());
    report.exit_code()
}

fn serve_blocking(cfg: &PipelineConfig) -> i32 {
    let dir = match cfg.existing_index_dir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return EXIT_RUNTIME;
        }
    };
    match runtime.block_on(serve(cfg, dir)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

/// Serves until interrupted, picking up new snapshots as they appear.
pub async fn serve(cfg: &PipelineConfig, index_dir: PathBuf) -> Result<(), RunError> {
    if !index_dir.is_dir() {
        return Err(ConfigError::MissingPath {
            key: "output.index_dir",
            path: index_dir,
        }
        .into());
    }
    let handle = Arc::new(SnapshotHandle::watch(&index_dir)?);
    if handle.get().is_none() {
        warn!("no snapshot under {} yet; answering 503 until one appears", index_dir.display());
    }
    let app = router(handle.clone(), &cfg.service.cors_origins);
    let addr = format!("{}:{}", cfg.service.bind, cfg.service.port);
    let io = |source| RunError::Io {
        path: PathBuf::from(&addr),
        source,
    };
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(io)?;
    println!("listening on http://{}", listener.local_addr().map_err(io)?);

    if cfg.service.reload_interval > 0 {
        let every = Duration::from_secs(cfg.service.reload_interval);
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            loop {
                tick.tick().await;
                let h = handle.clone();
                match tokio::task::spawn_blocking(move || h.reload()).await {
                    Ok(Ok(true)) => info!("switched to a new snapshot"),
                    Ok(Err(e)) => warn!("snapshot reload failed: {e}"),
                    _ => {}
                }
            }
        });
    }
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(io)
}
