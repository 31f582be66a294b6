//! Harness: fixture review server, app state on a manual clock and the API
//! on an ephemeral port.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use reviewq_core::etl::{ChangeInfo, DatasetStore, MemoryStore};
use reviewq_core::factors::{
    AgeCategory, Outcome, PatchesCategory, PeerReview, SizeCategory, TestVerdict,
};
use reviewq_core::synthgen::{emit_fixture_server_payloads, planted_network, sample_dataset, Emission, PlantedSpec};
use reviewq_core::{ChangeType, Config, FactorVector, MergeConflict};
use reviewq_service::fixture::RunningFixture;
use reviewq_service::{AppState, FixtureServer, GerritClient, Hooks, ManualClock, RetryPolicy};
use tempfile::TempDir;

pub fn epoch() -> DateTime<Utc> {
    // A Monday.
    Utc.with_ymd_and_hms(2024, 6, 3, 0, 0, 0).unwrap()
}

pub fn config_for(url: &str, dir: &Path) -> Config {
    let text = format!("[review_server]\nurl = \"{url}\"\npage_size = 50\n");
    Config::from_toml(&text, dir).unwrap()
}

/// Closed history sampled from a model where passing tests and approvals
/// make merging likely, plus open changes for reviewers 1001..=1003.
pub fn history(n: usize, seed: u64, snapshot: DateTime<Utc>) -> Vec<ChangeInfo> {
    use reviewq_core::factors::var;
    let mut rows = Vec::new();
    for verdict in 0..3 {
        for review in 0..5 {
            let p: f64 = match (verdict, review) {
                (0, _) | (_, 0) => 0.05,
                (2, 3) | (2, 4) => 0.95,
                _ => 0.5,
            };
            rows.extend([1.0 - p, p]);
        }
    }
    let net = planted_network(&[var::TEST_VERDICT, var::PEER_REVIEW], &[], rows).unwrap();
    let spec = PlantedSpec::new(net, n, seed).unwrap().with_open_fraction(0.2).unwrap();
    emit_fixture_server_payloads(&sample_dataset(&spec), &Emission::standard(snapshot))
}

pub fn open_vector(id: &str, kind: ChangeType, conflict: MergeConflict, verdict: TestVerdict, review: PeerReview) -> FactorVector {
    FactorVector {
        change_id: id.into(),
        age: AgeCategory::Medium,
        size: SizeCategory::Small,
        patches: PatchesCategory::Low,
        test_verdict: verdict,
        peer_review: review,
        change_type: kind,
        merge_conflict: conflict,
        outcome: None,
    }
}

/// Three open requests for reviewer 2001: a conflicted trouble report, a
/// clean feature and a clean trouble report.
pub fn three_requests(snapshot: DateTime<Utc>) -> Vec<ChangeInfo> {
    let rows = vec![
        open_vector("demo~master~Iconflicted", ChangeType::TroubleReport, MergeConflict::Yes, TestVerdict::Passed, PeerReview::Approved),
        open_vector("demo~master~Ifeature", ChangeType::Feature, MergeConflict::No, TestVerdict::Passed, PeerReview::NoVerdict),
        open_vector("demo~master~Ibugfix", ChangeType::TroubleReport, MergeConflict::No, TestVerdict::Failed, PeerReview::NoVerdict),
    ];
    let mut emission = Emission::standard(snapshot);
    emission.project = "demo".into();
    emission.reviewers = vec![2001];
    emit_fixture_server_payloads(&rows, &emission)
}

pub struct Harness {
    pub fixture: FixtureServer,
    pub running: RunningFixture,
    pub clock: Arc<ManualClock>,
    pub state: Arc<AppState>,
    pub api: String,
    pub http: reqwest::Client,
    pub dir: TempDir,
    api_task: tokio::task::JoinHandle<()>,
}

impl Drop for Harness {
    fn drop(&mut self) {
        self.api_task.abort();
        self.running.handle.abort();
    }
}

pub fn fast_retry() -> RetryPolicy {
    RetryPolicy { attempts: 2, initial_backoff: std::time::Duration::from_millis(5) }
}

impl Harness {
    pub async fn start(changes: Vec<ChangeInfo>, now: DateTime<Utc>) -> Harness {
        Self::start_with(changes, now, Arc::new(MemoryStore::new()), Hooks::default(), |_| {}).await
    }

    pub async fn start_with(
        changes: Vec<ChangeInfo>,
        now: DateTime<Utc>,
        store: Arc<dyn DatasetStore>,
        hooks: Hooks,
        tweak: impl FnOnce(&mut Config),
    ) -> Harness {
        let fixture = FixtureServer::new(changes, now);
        let running = fixture.spawn().await.unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut config = config_for(&running.url(), dir.path());
        tweak(&mut config);
        let client = GerritClient::new(&running.url(), config.review_server.page_size).unwrap().with_retry(fast_retry());
        let clock = Arc::new(ManualClock::new(now));
        let state = Arc::new(AppState::new(config, store, client, clock.clone()).with_hooks(hooks));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let api = format!("http://{}", listener.local_addr().unwrap());
        let app = reviewq_service::router(state.clone());
        let api_task = tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        Harness { fixture, running, clock, state, api, http: reqwest::Client::new(), dir, api_task }
    }

    pub async fn get(&self, path: &str) -> (u16, String) {
        let resp = self.http.get(format!("{}{path}", self.api)).send().await.unwrap();
        (resp.status().as_u16(), resp.text().await.unwrap())
    }

    pub async fn post(&self, path: &str) -> (u16, String) {
        let resp = self.http.post(format!("{}{path}", self.api)).send().await.unwrap();
        (resp.status().as_u16(), resp.text().await.unwrap())
    }
}

/// Compares against `tests/golden/<name>`; `REVIEWQ_BLESS=1` rewrites it.
pub fn assert_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("REVIEWQ_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden {name}");
}

/// Pretty-prints a JSON body so goldens diff line by line.
pub fn pretty(body: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    let mut s = serde_json::to_string_pretty(&v).unwrap();
    s.push('\n');
    s
}

pub fn outcome_of(o: Option<Outcome>) -> &'static str {
    match o {
        Some(Outcome::Merged) => "merged",
        Some(Outcome::Abandoned) => "abandoned",
        None => "open",
    }
}
