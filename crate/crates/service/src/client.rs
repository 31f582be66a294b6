//! Paginated client for Gerrit's `/changes/` query endpoint.

use std::time::Duration;

use reqwest::{StatusCode, Url};
use reviewq_core::etl::{parse_changes_body, WireError};
use reviewq_core::RawChange;
use thiserror::Error;

/// Query options that make Gerrit include every field ingestion maps.
const OPTIONS: [&str; 4] = ["ALL_REVISIONS", "CURRENT_COMMIT", "DETAILED_LABELS", "DETAILED_ACCOUNTS"];

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("review server unreachable after {attempts} attempt(s): {message}")]
    Transient { attempts: u32, message: String },
    #[error("review server rejected the credentials (HTTP {status}); check review_server.credentials_env")]
    Auth { status: u16 },
    #[error("review server answered HTTP {status}: {excerpt:?}")]
    Status { status: u16, excerpt: String },
    #[error(transparent)]
    Protocol(#[from] WireError),
    #[error("invalid review server URL {url:?}: {reason}")]
    Url { url: String, reason: String },
}

impl FetchError {
    pub fn is_transient(&self) -> bool {
        matches!(self, FetchError::Transient { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    /// Total tries per page, including the first.
    pub attempts: u32,
    /// Doubled after every failed try.
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, initial_backoff: Duration::from_millis(250) }
    }
}

#[derive(Debug, Clone)]
pub struct GerritClient {
    http: reqwest::Client,
    base: Url,
    auth: Option<(String, String)>,
    page_size: usize,
    retry: RetryPolicy,
}

enum Attempt {
    Retry(String),
    Fail(FetchError),
}

fn excerpt(body: &str) -> String {
    body.chars().take(120).collect()
}

impl GerritClient {
    pub fn new(base_url: &str, page_size: usize) -> Result<Self, FetchError> {
        let bad = |reason: String| FetchError::Url { url: base_url.to_string(), reason };
        if page_size == 0 {
            return Err(bad("page size must be at least 1".into()));
        }
        let mut base = Url::parse(base_url).map_err(|e| bad(e.to_string()))?;
        if base.cannot_be_a_base() {
            return Err(bad("not a base URL".into()));
        }
        if !base.path().ends_with('/') {
            let path = format!("{}/", base.path());
            base.set_path(&path);
        }
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| bad(e.to_string()))?;
        Ok(GerritClient { http, base, auth: None, page_size, retry: RetryPolicy::default() })
    }

    /// Authenticated requests go to Gerrit's `/a/` prefix with HTTP basic auth.
    pub fn with_auth(mut self, auth: Option<(String, String)>) -> Self {
        self.auth = auth;
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn base_url(&self) -> &Url {
        &self.base
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }

    fn page_url(&self, query: &str, start: usize) -> Url {
        let path = if self.auth.is_some() { "a/changes/" } else { "changes/" };
        let mut url = self.base.join(path).expect("static relative path");
        {
            let mut pairs = url.query_pairs_mut();
            pairs.append_pair("q", query);
            pairs.append_pair("n", &self.page_size.to_string());
            if start > 0 {
                pairs.append_pair("S", &start.to_string());
            }
            for o in OPTIONS {
                pairs.append_pair("o", o);
            }
        }
        url
    }

    async fn attempt(&self, url: &Url) -> Result<String, Attempt> {
        let mut req = self.http.get(url.clone());
        if let Some((user, pass)) = &self.auth {
            req = req.basic_auth(user, Some(pass));
        }
        let resp = req.send().await.map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = resp.status();
        let body = resp.text().await.map_err(|e| Attempt::Retry(e.to_string()))?;
        match status {
            s if s.is_success() => Ok(body),
            StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => {
                Err(Attempt::Fail(FetchError::Auth { status: status.as_u16() }))
            }
            StatusCode::TOO_MANY_REQUESTS
            | StatusCode::INTERNAL_SERVER_ERROR
            | StatusCode::BAD_GATEWAY
            | StatusCode::SERVICE_UNAVAILABLE
            | StatusCode::GATEWAY_TIMEOUT => Err(Attempt::Retry(format!("HTTP {}: {:?}", status.as_u16(), excerpt(&body)))),
            _ => Err(Attempt::Fail(FetchError::Status { status: status.as_u16(), excerpt: excerpt(&body) })),
        }
    }

    async fn get(&self, url: &Url) -> Result<String, FetchError> {
        let attempts = self.retry.attempts.max(1);
        let mut backoff = self.retry.initial_backoff;
        let mut last = String::new();
        for n in 1..=attempts {
            match self.attempt(url).await {
                Ok(body) => return Ok(body),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(message)) => {
                    tracing::warn!(attempt = n, %url, error = %message, "review server request failed");
                    last = message;
                    if n < attempts {
                        tokio::time::sleep(backoff).await;
                        backoff *= 2;
                    }
                }
            }
        }
        Err(FetchError::Transient { attempts, message: last })
    }

    /// Every change matching `query`, following `_more_changes` until the
    /// server reports no more.
    pub async fn fetch_changes(&self, query: &str) -> Result<Vec<RawChange>, FetchError> {
        let mut out = Vec::new();
        loop {
            let body = self.get(&self.page_url(query, out.len())).await?;
            let page = parse_changes_body(&body)?;
            let more = page.last().and_then(|c| c.more_changes).unwrap_or(false);
            for info in &page {
                out.push(RawChange::try_from(info)?);
            }
            if !more || page.is_empty() {
                return Ok(out);
            }
        }
    }

    /// Open changes on which `user` is a reviewer.
    pub async fn fetch_open_for_reviewer(&self, user: &str) -> Result<Vec<RawChange>, FetchError> {
        self.fetch_changes(&format!("status:open reviewer:{user}")).await
    }
}
