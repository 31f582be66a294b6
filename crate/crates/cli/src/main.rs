//! `reviewq`: ingest review history, train the merge model, rank a
//! reviewer's queue, evaluate, generate synthetic data and serve the API.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use reviewq_core::etl::{encode_changes_body, parse_changes_body, store_dataset, DatasetStore, FileStore};
use reviewq_core::eval::DEFAULT_FOLDS;
use reviewq_core::synthgen::{emit_fixture_server_payloads, observations_from_payloads, parse_spec_file, sample_dataset};
use reviewq_core::{cross_validate, deserialize_model, Config};
use reviewq_service::jobs::RetrainError;
use reviewq_service::{
    ingest, load_or_train, prioritize_for_user, retrain, AppState, Clock, FixtureServer, GerritClient, ManualClock,
    ServedModel, SystemClock,
};

#[derive(Debug, Parser)]
#[command(name = "reviewq", version, about = "Rank code review requests by how likely they are to be merged")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, env = "REVIEWQ_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pull recent and open changes from the review server into the dataset.
    Ingest {
        /// Measure ages to this instant instead of now.
        #[arg(long)]
        at: Option<DateTime<Utc>>,
    },
    /// Fit the model on the stored dataset and write the artifact.
    Train {
        /// Timestamp recorded as the training time instead of now.
        #[arg(long)]
        at: Option<DateTime<Utc>>,
    },
    /// Rank a reviewer's open review requests.
    Prioritize {
        #[arg(long)]
        user: String,
        /// Measure ages to this instant instead of now.
        #[arg(long)]
        at: Option<DateTime<Utc>>,
    },
    /// Cross-validate on the stored dataset.
    Eval {
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for report.json and roc.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a planted synthetic dataset and matching review server payloads.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Directory for changes.json and dataset.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP API with the ingest/retrain scheduler.
    Serve {
        /// Overrides `server.bind`.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Serve a changes file as a review server, for demos and tests.
    #[command(hide = true)]
    FixtureServe {
        #[arg(long)]
        changes: PathBuf,
        #[arg(long, default_value = "127.0.0.1:0")]
        bind: String,
        /// The fixture's notion of now, for `-age:` queries.
        #[arg(long)]
        now: Option<DateTime<Utc>>,
    },
}

/// Exit 2 for usage and configuration problems, 1 for everything else.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Downstream(String),
}

fn failed(e: impl std::fmt::Display) -> Failure {
    Failure::Downstream(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // REVIEWQ_LOG takes a single level: error, warn, info, debug or trace.
    let level = std::env::var("REVIEWQ_LOG").ok().and_then(|l| l.parse().ok()).unwrap_or(tracing::Level::INFO);
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(1);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Downstream(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("no configuration: pass --config or set REVIEWQ_CONFIG".into()))?;
    Config::load(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn client_for(config: &Config) -> Result<GerritClient, Failure> {
    let auth = config.credentials().map_err(|e| Failure::Usage(e.to_string()))?;
    let client = GerritClient::new(&config.review_server.url, config.review_server.page_size)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(client.with_auth(auth))
}

fn state_for(config: Config, at: Option<DateTime<Utc>>) -> Result<Arc<AppState>, Failure> {
    let client = client_for(&config)?;
    let store = Arc::new(FileStore::new(&config.store.path));
    let clock: Arc<dyn Clock> = match at {
        Some(at) => Arc::new(ManualClock::new(at)),
        None => Arc::new(SystemClock),
    };
    Ok(Arc::new(AppState::new(config, store, client, clock)))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| failed(format!("cannot write {}: {e}", path.display())))
}

async fn run(cli: Cli) -> Result<(), Failure> {
    let format = cli.format;
    let config = cli.config.as_deref();
    match cli.command {
        Command::Ingest { at } => {
            let state = state_for(load_config(config)?, at)?;
            let summary = ingest(&state).await.map_err(failed)?;
            output::ingest(format, &summary);
        }
        Command::Train { at } => {
            let state = state_for(load_config(config)?, at)?;
            let summary = retrain(&state).await.map_err(|e| match e {
                RetrainError::EmptyDataset => failed("dataset is empty; run `reviewq ingest` first"),
                other => failed(other),
            })?;
            output::train(format, &summary, &state.config().model.path);
        }
        Command::Prioritize { user, at } => {
            if user.trim().is_empty() {
                return Err(Failure::Usage("--user must not be empty".into()));
            }
            let config = load_config(config)?;
            let path = &config.model.path;
            let bytes = fs::read(path)
                .map_err(|e| failed(format!("cannot read model {}: {e}; run `reviewq train` first", path.display())))?;
            let model = deserialize_model(&bytes).map_err(|e| failed(format!("model {}: {e}", path.display())))?;
            let served = ServedModel::new(model);
            let client = client_for(&config)?;
            let now = at.unwrap_or_else(Utc::now);
            let list = prioritize_for_user(&client, &served, &config.change_types, now, user.trim())
                .await
                .map_err(failed)?;
            output::prioritized(format, &list);
        }
        Command::Eval { k, seed, out } => {
            let config = load_config(config)?;
            let mut rows = FileStore::new(&config.store.path).load().map_err(failed)?;
            rows.retain(|r| r.is_closed());
            let report = cross_validate(&rows, &config.model.structure(), config.model.alpha, k, seed).map_err(failed)?;
            fs::create_dir_all(&out).map_err(|e| failed(format!("cannot create {}: {e}", out.display())))?;
            write(&out.join("report.json"), &report.to_json())?;
            write(&out.join("roc.csv"), &report.roc_csv())?;
            output::eval(format, &report, &out);
        }
        Command::Synth { spec, out } => {
            let text = fs::read_to_string(&spec)
                .map_err(|e| Failure::Usage(format!("cannot read spec {}: {e}", spec.display())))?;
            let (spec, emission) = parse_spec_file(&text).map_err(|e| Failure::Usage(format!("invalid spec: {e}")))?;
            let rows = sample_dataset(&spec);
            let payloads = emit_fixture_server_payloads(&rows, &emission);
            let observations = observations_from_payloads(&payloads, &emission);
            fs::create_dir_all(&out).map_err(|e| failed(format!("cannot create {}: {e}", out.display())))?;
            write(&out.join("changes.json"), &encode_changes_body(&payloads))?;
            let dataset = out.join("dataset.json");
            let _ = fs::remove_file(&dataset);
            store_dataset(&FileStore::new(&dataset), &observations).map_err(failed)?;
            output::synth(format, rows.len(), &out);
        }
        Command::Serve { bind } => {
            let config = load_config(config)?;
            let bind = bind.unwrap_or_else(|| config.server.bind.clone());
            let state = state_for(config, None)?;
            match load_or_train(&state).await.map_err(failed)? {
                Some(m) => tracing::info!(fingerprint = %m.fingerprint, "model loaded"),
                None => tracing::warn!("serving without a model until the first retrain"),
            }
            let listener = tokio::net::TcpListener::bind(&bind)
                .await
                .map_err(|e| failed(format!("cannot bind {bind}: {e}")))?;
            tracing::info!(addr = %listener.local_addr().map_err(failed)?, "listening");
            reviewq_service::serve(state, listener).await.map_err(failed)?;
        }
        Command::FixtureServe { changes, bind, now } => {
            let body = fs::read_to_string(&changes)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", changes.display())))?;
            let payloads = parse_changes_body(&body).map_err(|e| Failure::Usage(e.to_string()))?;
            let fixture = FixtureServer::new(payloads, now.unwrap_or_else(Utc::now));
            let running = fixture.spawn_on(&bind).await.map_err(|e| failed(format!("cannot bind {bind}: {e}")))?;
            println!("{}", running.url());
            running.handle.await.map_err(failed)?;
        }
    }
    Ok(())
}
