use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use reviewq_core::etl::{ChangeInfo, FileStore};
use reviewq_core::factors::{var, AgeCategory, PatchesCategory, PeerReview, SizeCategory, TestVerdict};
use reviewq_core::synthgen::{emit_fixture_server_payloads, planted_network, sample_dataset, Emission, PlantedSpec};
use reviewq_core::{ChangeType, Config, FactorVector, MergeConflict};
use reviewq_service::{load_or_train, AppState, FixtureServer, GerritClient, ManualClock, PrioritizedList};

fn snapshot() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 6, 3, 9, 30, 0).unwrap()
}

fn reviewq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reviewq"))
        .args(args)
        .env_remove("REVIEWQ_CONFIG")
        .env("REVIEWQ_LOG", "error")
        .output()
        .expect("binary runs")
}

async fn reviewq_async(args: Vec<String>) -> Output {
    tokio::task::spawn_blocking(move || reviewq(&args.iter().map(String::as_str).collect::<Vec<_>>()))
        .await
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, url: &str) -> PathBuf {
    let path = dir.join("reviewq.toml");
    std::fs::write(&path, format!("[review_server]\nurl = \"{url}\"\npage_size = 40\n")).unwrap();
    path
}

fn history() -> Vec<ChangeInfo> {
    let mut rows = Vec::new();
    for verdict in 0..3 {
        for review in 0..5 {
            let p: f64 = if verdict == 2 && review >= 3 { 0.9 } else { 0.2 };
            rows.extend([1.0 - p, p]);
        }
    }
    let net = planted_network(&[var::TEST_VERDICT, var::PEER_REVIEW], &[], rows).unwrap();
    let spec = PlantedSpec::new(net, 250, 5).unwrap().with_open_fraction(0.1).unwrap();
    let mut changes = emit_fixture_server_payloads(&sample_dataset(&spec), &Emission::standard(snapshot()));

    let open = |id: &str, kind, conflict, verdict| FactorVector {
        change_id: id.into(),
        age: AgeCategory::Medium,
        size: SizeCategory::Small,
        patches: PatchesCategory::Low,
        test_verdict: verdict,
        peer_review: PeerReview::Approved,
        change_type: kind,
        merge_conflict: conflict,
        outcome: None,
    };
    let mine = vec![
        open("demo~master~Ia", ChangeType::Feature, MergeConflict::No, TestVerdict::Passed),
        open("demo~master~Ib", ChangeType::TroubleReport, MergeConflict::Yes, TestVerdict::Passed),
        open("demo~master~Ic", ChangeType::TroubleReport, MergeConflict::No, TestVerdict::Failed),
    ];
    let mut emission = Emission::standard(snapshot());
    emission.project = "demo".into();
    emission.reviewers = vec![4242];
    changes.extend(emit_fixture_server_payloads(&mine, &emission));
    changes
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = reviewq(&["train"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(reviewq(&["prioritize"]).status.code(), Some(2));
    assert_eq!(reviewq(&["eval", "--k", "five", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn training_on_an_empty_store_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "http://127.0.0.1:9");
    let out = reviewq(&["--config", config.to_str().unwrap(), "train"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("dataset is empty"), "{}", stderr(&out));
    assert!(!dir.path().join("model.json").exists());
}

#[test]
fn unreachable_server_is_a_downstream_failure() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "http://127.0.0.1:9");
    let out = reviewq(&["--config", config.to_str().unwrap(), "ingest"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn synth_then_eval_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"n_rows": 400, "seed": 3, "snapshot_at": "2024-06-03T00:00:00Z", "open_fraction": 0.1}"#)
        .unwrap();
    let data = dir.path().join("data");
    let out = reviewq(&["synth", "--spec", spec.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(data.join("changes.json").exists());

    let config = dir.path().join("reviewq.toml");
    std::fs::write(&config, "[review_server]\nurl = \"http://127.0.0.1:9\"\n[store]\npath = \"data/dataset.json\"\n").unwrap();
    let config = config.to_str().unwrap();
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let dest = dir.path().join(run);
        let out = reviewq(&["--config", config, "eval", "--k", "5", "--seed", "11", "--out", dest.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        let report = std::fs::read(dest.join("report.json")).unwrap();
        let roc = std::fs::read_to_string(dest.join("roc.csv")).unwrap();
        assert!(roc.starts_with("fpr,tpr\n"));
        reports.push((report, roc));
    }
    assert_eq!(reports[0], reports[1]);
    let report: serde_json::Value = serde_json::from_slice(&reports[0].0).unwrap();
    assert_eq!(report["folds"], 5);
    assert_eq!(report["seed"], 11);
}

#[test]
fn synth_rejects_a_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"n_rows": 10}"#).unwrap();
    let out = reviewq(&["synth", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn cli_queue_matches_the_http_api() {
    let fixture = FixtureServer::new(history(), snapshot());
    let running = fixture.spawn().await.unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &running.url());
    let config = config_path.to_str().unwrap().to_string();
    let at = snapshot().to_rfc3339();
    let args = |rest: &[&str]| {
        let mut v = vec!["--config".to_string(), config.clone()];
        v.extend(rest.iter().map(|s| s.to_string()));
        v
    };

    let out = reviewq_async(args(&["ingest", "--at", &at])).await;
    assert!(out.status.success(), "{}", stderr(&out));
    let out = reviewq_async(args(&["--format", "json", "train", "--at", &at])).await;
    assert!(out.status.success(), "{}", stderr(&out));

    let out = reviewq_async(args(&["--format", "json", "prioritize", "--user", "4242", "--at", &at])).await;
    assert!(out.status.success(), "{}", stderr(&out));
    let from_cli: PrioritizedList = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<&str> = from_cli.items.iter().map(|i| i.change_id.as_str()).collect();
    assert_eq!(ids, ["demo~master~Ic", "demo~master~Ia", "demo~master~Ib"]);
    assert_eq!(serde_json::to_value(&from_cli).unwrap(), serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap());

    let table = reviewq_async(args(&["prioritize", "--user", "4242", "--at", &at])).await;
    let table = String::from_utf8(table.stdout).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["rank", "change_id", "type", "conflict", "probability", "subject"]);
    assert!(table.lines().nth(1).unwrap().starts_with("1 "));

    let config = Config::load(&config_path).unwrap();
    let client = GerritClient::new(&running.url(), config.review_server.page_size).unwrap();
    let store = Arc::new(FileStore::new(&config.store.path));
    let state = Arc::new(AppState::new(config, store, client, Arc::new(ManualClock::new(snapshot()))));
    load_or_train(&state).await.unwrap().expect("artifact written by the CLI");
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let api = format!("http://{}", listener.local_addr().unwrap());
    let server = tokio::spawn(reviewq_service::serve(state, listener));
    let body = reqwest::get(format!("{api}/api/v1/prioritize?user=4242")).await.unwrap().text().await.unwrap();
    let from_http: PrioritizedList = serde_json::from_str(&body).unwrap();
    assert_eq!(from_http, from_cli);
    server.abort();
    running.handle.abort();
}
