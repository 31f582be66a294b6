//! Daily ingestion and weekly retraining on wall-clock times (UTC).
//!
//! [`Scheduler::tick`] is driven by a clock reading, which keeps the
//! scheduling logic testable with a virtual clock; [`run_scheduler`] wraps it
//! in a polling loop for production.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Datelike, NaiveTime, Utc, Weekday};
use serde::{Deserialize, Serialize};
use tokio::task::JoinHandle;

use crate::jobs::{ingest, retrain};
use crate::state::AppState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Job {
    Ingest,
    Retrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum RunOutcome {
    Succeeded { detail: String },
    Failed { error: String },
    /// The previous run of the same job was still active.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRun {
    pub job: Job,
    pub due_at: DateTime<Utc>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    #[serde(flatten)]
    pub outcome: RunOutcome,
}

/// First instant at or after `from` whose time of day is `at`.
pub fn next_daily(from: DateTime<Utc>, at: NaiveTime) -> DateTime<Utc> {
    let today = from.date_naive().and_time(at).and_utc();
    if today >= from {
        today
    } else {
        today + chrono::Duration::days(1)
    }
}

/// First instant at or after `from` falling on `weekday` at `at`.
pub fn next_weekly(from: DateTime<Utc>, weekday: Weekday, at: NaiveTime) -> DateTime<Utc> {
    let mut t = next_daily(from, at);
    while t.weekday() != weekday {
        t += chrono::Duration::days(1);
    }
    t
}

pub struct Scheduler {
    state: Arc<AppState>,
    next_ingest: DateTime<Utc>,
    next_retrain: DateTime<Utc>,
    ingest_running: Arc<AtomicBool>,
    retrain_running: Arc<AtomicBool>,
    history: Arc<Mutex<Vec<JobRun>>>,
}

impl Scheduler {
    /// Jobs first fire at their next slot at or after `now`.
    pub fn new(state: Arc<AppState>, now: DateTime<Utc>) -> Self {
        let s = &state.config().schedule;
        let next_ingest = next_daily(now, s.ingest_at.0);
        let next_retrain = next_weekly(now, s.retrain_weekday, s.retrain_at.0);
        Scheduler {
            state,
            next_ingest,
            next_retrain,
            ingest_running: Arc::new(AtomicBool::new(false)),
            retrain_running: Arc::new(AtomicBool::new(false)),
            history: Arc::new(Mutex::new(Vec::new())),
        }
    }

    pub fn next_due(&self, job: Job) -> DateTime<Utc> {
        match job {
            Job::Ingest => self.next_ingest,
            Job::Retrain => self.next_retrain,
        }
    }

    /// Finished and skipped runs, in completion order.
    pub fn history(&self) -> Vec<JobRun> {
        self.history.lock().unwrap().clone()
    }

    /// Starts every job whose slot has passed. A slot missed several times
    /// over fires once. Returns handles of the runs started.
    pub fn tick(&mut self, now: DateTime<Utc>) -> Vec<JoinHandle<()>> {
        let s = self.state.config().schedule.clone();
        let after = now + chrono::Duration::nanoseconds(1);
        let mut handles = Vec::new();
        if now >= self.next_ingest {
            let due = std::mem::replace(&mut self.next_ingest, next_daily(after, s.ingest_at.0));
            handles.extend(self.launch(Job::Ingest, due, now));
        }
        if now >= self.next_retrain {
            let due = std::mem::replace(&mut self.next_retrain, next_weekly(after, s.retrain_weekday, s.retrain_at.0));
            handles.extend(self.launch(Job::Retrain, due, now));
        }
        handles
    }

    fn launch(&self, job: Job, due_at: DateTime<Utc>, now: DateTime<Utc>) -> Option<JoinHandle<()>> {
        let running = match job {
            Job::Ingest => self.ingest_running.clone(),
            Job::Retrain => self.retrain_running.clone(),
        };
        if running.swap(true, Ordering::SeqCst) {
            tracing::warn!(job = ?job, %due_at, outcome = "skipped", "previous run still active");
            self.history.lock().unwrap().push(JobRun {
                job,
                due_at,
                started_at: now,
                finished_at: now,
                outcome: RunOutcome::Skipped,
            });
            return None;
        }
        let state = self.state.clone();
        let history = self.history.clone();
        Some(tokio::spawn(async move {
            let outcome = match job {
                Job::Ingest => match ingest(&state).await {
                    Ok(s) => RunOutcome::Succeeded {
                        detail: format!("fetched {} changes, stored {}, skipped {}", s.fetched, s.stored, s.skipped),
                    },
                    Err(e) => RunOutcome::Failed { error: e.to_string() },
                },
                Job::Retrain => match retrain(&state).await {
                    Ok(s) => RunOutcome::Succeeded {
                        detail: format!("trained on {} rows, model {}", s.rows, &s.fingerprint[..12]),
                    },
                    Err(e) => RunOutcome::Failed { error: e.to_string() },
                },
            };
            match &outcome {
                RunOutcome::Failed { error } => {
                    tracing::error!(job = ?job, %due_at, outcome = "failed", %error, "job failed")
                }
                RunOutcome::Succeeded { detail } => {
                    tracing::info!(job = ?job, %due_at, outcome = "succeeded", %detail, "job finished")
                }
                RunOutcome::Skipped => {}
            }
            history.lock().unwrap().push(JobRun {
                job,
                due_at,
                started_at: now,
                finished_at: state.clock().now(),
                outcome,
            });
            running.store(false, Ordering::SeqCst);
        }))
    }
}

/// Polls the state's clock every `schedule.poll_seconds` forever.
pub async fn run_scheduler(state: Arc<AppState>) {
    let poll = Duration::from_secs(state.config().schedule.poll_seconds);
    let mut scheduler = Scheduler::new(state.clone(), state.clock().now());
    tracing::info!(
        next_ingest = %scheduler.next_due(Job::Ingest),
        next_retrain = %scheduler.next_due(Job::Retrain),
        "scheduler started"
    );
    loop {
        scheduler.tick(state.clock().now());
        tokio::time::sleep(poll).await;
    }
}
