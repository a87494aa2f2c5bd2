//! HTTP service handing out depth-pair annotation tasks to three groups.
//!
//! Answers go to an append-only JSON-lines log and are synced to disk
//! before the request is acknowledged; the log is replayed at startup.

mod log;
mod queue;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hairstep::annotate::{aggregate_answers, AnnotationAnswer, Choice, PairSample, GROUPS};
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

pub use self::log::AnswerLog;
pub use self::queue::{Handout, Rejection, TaskQueue};
use crate::cli::ServeArgs;
use crate::commands::read_jsonl;
use crate::exit;

const FALLBACK_UI: &str = include_str!("../../assets/index.html");

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub images: PathBuf,
    pub pairs: PathBuf,
    pub state: PathBuf,
    pub ui: Option<PathBuf>,
    pub seed: u64,
    pub lease: Duration,
}

impl From<&ServeArgs> for ServiceConfig {
    fn from(a: &ServeArgs) -> Self {
        Self {
            images: a.images.clone(),
            pairs: a.pairs.clone(),
            state: a.state.clone(),
            ui: a.ui.clone(),
            seed: a.seed,
            lease: Duration::from_secs(a.lease_secs),
        }
    }
}

struct Inner {
    queue: TaskQueue,
    log: AnswerLog,
}

pub struct Service {
    inner: Mutex<Inner>,
    image_urls: HashMap<String, String>,
    config: ServiceConfig,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskView {
    pub pair_id: String,
    pub image_url: Option<String>,
    pub p1: [u32; 2],
    pub p2: [u32; 2],
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct AnswerBody {
    pair_id: String,
    group: u8,
    choice: Choice,
    elapsed: f64,
}

#[derive(Debug, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct Stats {
    pub answered: usize,
    pub valid: usize,
    pub agreement_rate: Option<f64>,
    pub median_elapsed: Option<f64>,
}

impl Service {
    /// Loads the pairs, indexes the image directory and replays the answer
    /// log.
    pub fn open(config: ServiceConfig) -> anyhow::Result<Self> {
        let pairs: Vec<PairSample> = read_jsonl(&config.pairs)?;
        if pairs.is_empty() {
            ::log::warn!("{} holds no pairs", config.pairs.display());
        }
        let mut image_urls = HashMap::new();
        for entry in std::fs::read_dir(&config.images)
            .with_context(|| format!("cannot list {}", config.images.display()))?
        {
            let path = entry?.path();
            if let (true, Some(stem), Some(name)) = (
                path.is_file(),
                path.file_stem().and_then(|s| s.to_str()),
                path.file_name().and_then(|s| s.to_str()),
            ) {
                image_urls.insert(
                    stem.to_string(),
                    format!("/images/{}", utf8_percent_encode(name, NON_ALPHANUMERIC)),
                );
            }
        }
        let missing = pairs
            .iter()
            .filter(|p| p.image_id.as_ref().is_none_or(|id| !image_urls.contains_key(id)))
            .count();
        if missing > 0 {
            ::log::warn!("{missing} pairs have no matching image in {}", config.images.display());
        }

        let n_pairs = pairs.len();
        let mut queue = TaskQueue::new(pairs, config.seed, config.lease)?;
        let (log, answers) = AnswerLog::open(&config.state)?;
        let replayed = answers.len();
        for (i, a) in answers.into_iter().enumerate() {
            let pair = a.pair_id.clone();
            queue.record(a).map_err(|r| {
                exit::invalid(format!(
                    "{} record {}: pair {pair}: {}",
                    config.state.display(),
                    i + 1,
                    describe(r)
                ))
            })?;
        }
        ::log::info!(
            "{n_pairs} pairs for {GROUPS} groups, {replayed} answers replayed, task order seed {}",
            config.seed
        );
        Ok(Self {
            inner: Mutex::new(Inner { queue, log }),
            image_urls,
            config,
        })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn stats(&self) -> Stats {
        let inner = self.lock();
        let (_, s) = aggregate_answers(inner.queue.answers()).expect("replayed answers are consistent");
        Stats {
            answered: s.answered,
            valid: s.valid,
            agreement_rate: s.agreement_rate,
            median_elapsed: s.median_elapsed,
        }
    }
}

fn describe(r: Rejection) -> &'static str {
    match r {
        Rejection::BadGroup => "group must be 1, 2 or 3",
        Rejection::UnknownPair => "unknown pair id",
        Rejection::Duplicate => "this group already answered the pair",
    }
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(json!({ "error": msg.into() }))).into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    let router = Router::new()
        .route("/api/task", get(get_task))
        .route("/api/answer", post(post_answer))
        .route("/api/stats", get(get_stats))
        .route("/api/aggregate", get(get_aggregate))
        .nest_service("/images", ServeDir::new(&svc.config.images));
    let router = match &svc.config.ui {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.route("/", get(|| async { Html(FALLBACK_UI) })),
    };
    router.with_state(svc)
}

async fn get_task(State(svc): State<Arc<Service>>, Query(q): Query<HashMap<String, String>>) -> Response {
    let Some(group) = q.get("group").and_then(|g| g.parse::<u8>().ok()) else {
        return error(StatusCode::BAD_REQUEST, "query parameter group=1|2|3 is required");
    };
    let mut inner = svc.lock();
    match inner.queue.next_task(group, Instant::now()) {
        None => error(StatusCode::BAD_REQUEST, describe(Rejection::BadGroup)),
        Some(Handout::Drained) => StatusCode::NO_CONTENT.into_response(),
        Some(Handout::Busy(wait)) => {
            let secs = wait.as_secs_f64().ceil().max(1.0) as u64;
            let mut r = error(StatusCode::SERVICE_UNAVAILABLE, "every remaining pair is reserved");
            r.headers_mut().insert(header::RETRY_AFTER, secs.into());
            r
        }
        Some(Handout::Task(i)) => {
            let p = inner.queue.pair(i);
            Json(TaskView {
                pair_id: p.pair_id.clone(),
                image_url: p.image_id.as_ref().and_then(|id| svc.image_urls.get(id).cloned()),
                p1: p.p1,
                p2: p.p2,
            })
            .into_response()
        }
    }
}

async fn post_answer(State(svc): State<Arc<Service>>, body: Bytes) -> Response {
    let body: AnswerBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed answer: {e}")),
    };
    if !(body.elapsed.is_finite() && body.elapsed >= 0.0) {
        return error(StatusCode::BAD_REQUEST, "elapsed must be a non-negative number of seconds");
    }
    let answer = AnnotationAnswer {
        pair_id: body.pair_id,
        group_id: body.group,
        choice: body.choice,
        elapsed: body.elapsed,
    };

    let mut inner = svc.lock();
    if let Err(r) = inner.queue.check(&answer) {
        let status = match r {
            Rejection::BadGroup => StatusCode::BAD_REQUEST,
            Rejection::UnknownPair => StatusCode::NOT_FOUND,
            Rejection::Duplicate => StatusCode::CONFLICT,
        };
        return error(status, describe(r));
    }
    if let Err(e) = inner.log.append(&answer) {
        ::log::error!("{e:#}");
        return error(StatusCode::INTERNAL_SERVER_ERROR, "answer could not be stored");
    }
    let (pair_id, group) = (answer.pair_id.clone(), answer.group_id);
    inner.queue.record(answer).expect("checked above");
    let answered = inner.queue.answers().len();
    drop(inner);
    Json(json!({ "pairId": pair_id, "group": group, "answered": answered })).into_response()
}

async fn get_stats(State(svc): State<Arc<Service>>) -> Response {
    Json(svc.stats()).into_response()
}

async fn get_aggregate(State(svc): State<Arc<Service>>) -> Response {
    let labels = {
        let inner = svc.lock();
        aggregate_answers(inner.queue.answers()).expect("replayed answers are consistent").0
    };
    let mut body = String::new();
    for l in &labels {
        body.push_str(&serde_json::to_string(l).expect("labels serialize"));
        body.push('\n');
    }
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

/// Entry point of the `serve` subcommand.
pub fn run(args: &ServeArgs) -> anyhow::Result<()> {
    let svc = Arc::new(Service::open(args.into())?);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| exit::fail(exit::Status::Usage, format!("bad listen address: {e}")))?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(svc))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("server failed")
    })
}
