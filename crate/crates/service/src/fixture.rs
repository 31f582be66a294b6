//! In-process Gerrit stand-in speaking the subset of `/changes/` that the
//! client uses: `q` with `status:`, `reviewer:`, `project:` and `-age:Nd`
//! terms, `n`/`S` paging and the `_more_changes` marker.

use std::collections::VecDeque;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, Utc};
use reviewq_core::etl::gerrit::parse_timestamp;
use reviewq_core::etl::{encode_changes_body, ChangeInfo};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

/// Server-side page limit when the request has no `n`.
pub const DEFAULT_LIMIT: usize = 500;

/// One-shot misbehaviour applied to the next request.
#[derive(Debug, Clone, PartialEq)]
pub enum Fault {
    Status(u16),
    /// 200 with a body that is not JSON.
    Garbage,
    /// Serve normally after a pause.
    Delay(Duration),
}

#[derive(Debug)]
struct Inner {
    changes: RwLock<Vec<ChangeInfo>>,
    now: RwLock<DateTime<Utc>>,
    requests: AtomicUsize,
    faults: Mutex<VecDeque<Fault>>,
}

/// Cheap to clone; clones share state.
#[derive(Debug, Clone)]
pub struct FixtureServer {
    inner: Arc<Inner>,
}

pub struct RunningFixture {
    pub addr: SocketAddr,
    pub handle: JoinHandle<()>,
}

impl RunningFixture {
    pub fn url(&self) -> String {
        format!("http://{}/", self.addr)
    }
}

#[derive(Debug, PartialEq)]
enum Term {
    Status(&'static [&'static str]),
    Reviewer(String),
    Project(String),
    UpdatedWithinDays(i64),
}

fn parse_query(q: &str) -> Result<Vec<Term>, String> {
    q.split_whitespace()
        .map(|term| {
            if let Some(s) = term.strip_prefix("status:") {
                Ok(Term::Status(match s {
                    "open" | "new" => &["NEW"],
                    "merged" => &["MERGED"],
                    "abandoned" => &["ABANDONED"],
                    "closed" => &["MERGED", "ABANDONED"],
                    _ => return Err(format!("unsupported status {s:?}")),
                }))
            } else if let Some(r) = term.strip_prefix("reviewer:") {
                Ok(Term::Reviewer(r.to_string()))
            } else if let Some(p) = term.strip_prefix("project:") {
                Ok(Term::Project(p.to_string()))
            } else if let Some(days) = term.strip_prefix("-age:").and_then(|d| d.strip_suffix('d')) {
                days.parse()
                    .map(Term::UpdatedWithinDays)
                    .map_err(|_| format!("bad age term {term:?}"))
            } else {
                Err(format!("unsupported query term {term:?}"))
            }
        })
        .collect()
}

fn matches(change: &ChangeInfo, terms: &[Term], now: DateTime<Utc>) -> bool {
    terms.iter().all(|t| match t {
        Term::Status(s) => s.contains(&change.status.as_str()),
        Term::Reviewer(r) => change
            .reviewers
            .get("REVIEWER")
            .is_some_and(|rs| rs.iter().any(|a| a.account_id.to_string() == *r)),
        Term::Project(p) => change.project == *p,
        Term::UpdatedWithinDays(days) => {
            let stamp = change.updated.as_deref().unwrap_or(&change.created);
            parse_timestamp(stamp).is_some_and(|t| now - t < chrono::Duration::days(*days))
        }
    })
}

impl FixtureServer {
    /// `now` anchors `-age:` terms.
    pub fn new(changes: Vec<ChangeInfo>, now: DateTime<Utc>) -> Self {
        FixtureServer {
            inner: Arc::new(Inner {
                changes: RwLock::new(changes),
                now: RwLock::new(now),
                requests: AtomicUsize::new(0),
                faults: Mutex::new(VecDeque::new()),
            }),
        }
    }

    pub fn set_changes(&self, changes: Vec<ChangeInfo>) {
        *self.inner.changes.write().unwrap() = changes;
    }

    pub fn set_now(&self, now: DateTime<Utc>) {
        *self.inner.now.write().unwrap() = now;
    }

    pub fn push_fault(&self, fault: Fault) {
        self.inner.faults.lock().unwrap().push_back(fault);
    }

    pub fn request_count(&self) -> usize {
        self.inner.requests.load(Ordering::SeqCst)
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/changes/", get(changes))
            .route("/a/changes/", get(changes))
            .with_state(self.clone())
    }

    /// Serves on an ephemeral localhost port until the handle is aborted.
    pub async fn spawn(&self) -> std::io::Result<RunningFixture> {
        self.spawn_on("127.0.0.1:0").await
    }

    pub async fn spawn_on(&self, bind: &str) -> std::io::Result<RunningFixture> {
        let listener = TcpListener::bind(bind).await?;
        let addr = listener.local_addr()?;
        let app = self.router();
        let handle = tokio::spawn(async move {
            if let Err(e) = axum::serve(listener, app).await {
                tracing::error!(error = %e, "fixture server stopped");
            }
        });
        Ok(RunningFixture { addr, handle })
    }

    fn page(&self, params: &[(String, String)]) -> Result<String, (StatusCode, String)> {
        let param = |k: &str| params.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let bad = |m: String| (StatusCode::BAD_REQUEST, m);
        let terms = parse_query(param("q").unwrap_or("")).map_err(bad)?;
        let limit = match param("n") {
            Some(n) => n.parse::<usize>().map_err(|_| bad(format!("bad n {n:?}")))?.max(1),
            None => DEFAULT_LIMIT,
        };
        let start = match param("S") {
            Some(s) => s.parse::<usize>().map_err(|_| bad(format!("bad S {s:?}")))?,
            None => 0,
        };
        let now = *self.inner.now.read().unwrap();
        let all = self.inner.changes.read().unwrap();
        let hits: Vec<&ChangeInfo> = all.iter().filter(|c| matches(c, &terms, now)).collect();
        let mut page: Vec<ChangeInfo> = hits.iter().skip(start).take(limit).map(|c| {
            let mut c = (*c).clone();
            c.more_changes = None;
            c
        }).collect();
        if start + page.len() < hits.len() {
            if let Some(last) = page.last_mut() {
                last.more_changes = Some(true);
            }
        }
        Ok(encode_changes_body(&page))
    }
}

async fn changes(State(server): State<FixtureServer>, Query(params): Query<Vec<(String, String)>>) -> Response {
    server.inner.requests.fetch_add(1, Ordering::SeqCst);
    let fault = server.inner.faults.lock().unwrap().pop_front();
    match fault {
        Some(Fault::Status(code)) => {
            let status = StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            return (status, format!("injected fault {code}")).into_response();
        }
        Some(Fault::Garbage) => return (StatusCode::OK, ")]}'\n<html>maintenance</html>").into_response(),
        Some(Fault::Delay(d)) => tokio::time::sleep(d).await,
        None => {}
    }
    match server.page(&params) {
        Ok(body) => ([("content-type", "application/json; charset=utf-8")], body).into_response(),
        Err((status, msg)) => (status, msg).into_response(),
    }
}
