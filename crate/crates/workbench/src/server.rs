//! HTTP API over a project: sample curation, background training with a
//! pollable trial log, and limiter-filtered map queries.

use std::io::Cursor;
use std::net::SocketAddr;
use std::sync::atomic::Ordering;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use gridsense::classifier::{StopReason, Trial};
use gridsense::mapping::MapRecord;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::maps::{filtered_records, map_registered};
use crate::project::{ImageRecord, Project, SampleRecord};
use crate::train::{install_model, train_snapshot, TrainRequest, TrialLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Idle,
    Running,
    Done,
    Stopped,
    Failed,
}

struct Job {
    state: JobState,
    log: Arc<TrialLog>,
    error: Option<String>,
}

pub struct AppState {
    project: RwLock<Project>,
    job: Mutex<Job>,
}

impl AppState {
    pub fn new(project: Project) -> Arc<Self> {
        Arc::new(Self {
            project: RwLock::new(project),
            job: Mutex::new(Job {
                state: JobState::Idle,
                log: Arc::new(TrialLog::default()),
                error: None,
            }),
        })
    }

    pub fn project(&self) -> Project {
        self.project.read().expect("project lock").clone()
    }

    /// Applies `edit` to a copy of the project and commits it once saved.
    fn mutate<T>(&self, edit: impl FnOnce(&mut Project) -> Result<T, Error>) -> Result<T, Error> {
        let mut guard = self.project.write().expect("project lock");
        let mut next = guard.clone();
        let out = edit(&mut next)?;
        next.save()?;
        *guard = next;
        Ok(out)
    }
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl From<gridsense::Error> for ApiError {
    fn from(e: gridsense::Error) -> Self {
        Self(e.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        use gridsense::Error as Core;
        let status = match &self.0 {
            Error::UnknownSample(_) | Error::UnknownImage(_) => StatusCode::NOT_FOUND,
            Error::DuplicateSample { .. } | Error::Busy | Error::NoModel => StatusCode::CONFLICT,
            Error::Io(_) | Error::Core(Core::Io(_)) | Error::Core(Core::ImageRead { .. }) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        };
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ImageSummary {
    pub id: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelSummary {
    pub c: f64,
    pub gamma: f64,
    pub support_vectors: usize,
    pub cv_accuracy: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub name: String,
    pub classes: Vec<String>,
    pub radius: u32,
    pub grid_step: u32,
    pub images: Vec<ImageSummary>,
    pub samples: Vec<SampleRecord>,
    pub sample_count: usize,
    pub model: Option<ModelSummary>,
    pub report_rows: usize,
    pub stale: bool,
}

fn summarize(p: &Project) -> ProjectSummary {
    ProjectSummary {
        name: p.name.clone(),
        classes: p.classes.clone(),
        radius: p.recipe.max_radius(),
        grid_step: p.grid_step,
        images: p
            .images
            .iter()
            .map(|(id, ImageRecord { width, height, .. })| ImageSummary {
                id: id.clone(),
                width: *width,
                height: *height,
            })
            .collect(),
        samples: p.samples.clone(),
        sample_count: p.samples.len(),
        model: p.model.as_ref().map(|m| ModelSummary {
            c: m.svm.c,
            gamma: m.svm.gamma,
            support_vectors: m.svm.support_vectors.len(),
            cv_accuracy: p.report.as_ref().map(|r| r.best_accuracy()),
        }),
        report_rows: p.report.as_ref().map_or(0, |r| r.trials.len()),
        stale: p.stale,
    }
}

async fn get_project(State(app): State<Arc<AppState>>) -> Json<ProjectSummary> {
    Json(summarize(&app.project.read().expect("project lock")))
}

async fn get_image(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let project = app.project();
    let bytes = tokio::task::spawn_blocking(move || -> Result<Vec<u8>, Error> {
        let image = project.load_image(&id)?;
        let mut out = Cursor::new(Vec::new());
        image.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    })
    .await
    .map_err(|e| Error::Invalid(e.to_string()))??;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NewSample {
    pub image: String,
    pub x: i32,
    pub y: i32,
    pub class: String,
}

async fn post_sample(
    State(app): State<Arc<AppState>>,
    Json(s): Json<NewSample>,
) -> ApiResult<(StatusCode, Json<SampleRecord>)> {
    let record = app.mutate(|p| p.add_sample(&s.image, s.x, s.y, &s.class))?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn delete_sample(State(app): State<Arc<AppState>>, Path(id): Path<u64>) -> ApiResult<Json<SampleRecord>> {
    Ok(Json(app.mutate(|p| p.remove_sample(id))?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Retag {
    pub class: String,
}

async fn patch_sample(
    State(app): State<Arc<AppState>>,
    Path(id): Path<u64>,
    Json(r): Json<Retag>,
) -> ApiResult<Json<SampleRecord>> {
    Ok(Json(app.mutate(|p| p.retag_sample(id, &r.class))?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainStatus {
    pub state: JobState,
    /// Trials reported so far, starting at `since`.
    pub trials: Vec<Trial>,
    pub total: usize,
    pub error: Option<String>,
}

async fn post_train(
    State(app): State<Arc<AppState>>,
    Json(request): Json<TrainRequest>,
) -> ApiResult<(StatusCode, Json<TrainStatus>)> {
    let mut job = app.job.lock().expect("job lock");
    if job.state == JobState::Running {
        return Err(Error::Busy.into());
    }
    let snapshot = app.project();
    snapshot.training_set().validated_tags()?;
    let log = Arc::new(TrialLog::to_file(&snapshot.search_log_path())?);
    *job = Job {
        state: JobState::Running,
        log: Arc::clone(&log),
        error: None,
    };
    drop(job);

    let worker = Arc::clone(&app);
    let stop = log.stop_flag();
    std::thread::spawn(move || {
        let outcome = train_snapshot(&snapshot, &request, log.as_ref()).and_then(|trained| {
            let stopped = trained.report.stop_reason == StopReason::CallerStop;
            worker.mutate(|p| {
                install_model(p, trained, &snapshot.samples);
                Ok(())
            })?;
            Ok(stopped)
        });
        let mut job = worker.job.lock().expect("job lock");
        match outcome {
            Ok(stopped) => job.state = if stopped { JobState::Stopped } else { JobState::Done },
            Err(_) if stop.load(Ordering::SeqCst) => job.state = JobState::Stopped,
            Err(e) => {
                job.state = JobState::Failed;
                job.error = Some(e.to_string());
            }
        }
    });
    Ok((
        StatusCode::ACCEPTED,
        Json(TrainStatus {
            state: JobState::Running,
            trials: Vec::new(),
            total: 0,
            error: None,
        }),
    ))
}

#[derive(Debug, Deserialize)]
struct Since {
    #[serde(default)]
    since: usize,
}

async fn train_status(State(app): State<Arc<AppState>>, Query(q): Query<Since>) -> Json<TrainStatus> {
    let job = app.job.lock().expect("job lock");
    let trials = job.log.trials();
    let trials = trials.lock().expect("trial lock");
    Json(TrainStatus {
        state: job.state,
        trials: trials.iter().skip(q.since).cloned().collect(),
        total: trials.len(),
        error: job.error.clone(),
    })
}

async fn train_stop(State(app): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let job = app.job.lock().expect("job lock");
    let running = job.state == JobState::Running;
    if running {
        job.log.stop_flag().store(true, Ordering::SeqCst);
    }
    Json(serde_json::json!({ "stopping": running }))
}

#[derive(Debug, Deserialize)]
struct MapQuery {
    image: String,
    #[serde(default)]
    limiter: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MapResponse {
    pub image: String,
    pub limiter: f64,
    pub classes: Vec<String>,
    pub records: Vec<MapRecord>,
}

async fn get_map(State(app): State<Arc<AppState>>, Query(q): Query<MapQuery>) -> ApiResult<Json<MapResponse>> {
    let project = app.project();
    let response = tokio::task::spawn_blocking(move || -> Result<MapResponse, Error> {
        let map = map_registered(&project, &q.image)?;
        Ok(MapResponse {
            records: filtered_records(&map, q.limiter)?,
            image: q.image,
            limiter: q.limiter,
            classes: map.classes,
        })
    })
    .await
    .map_err(|e| Error::Invalid(e.to_string()))??;
    Ok(Json(response))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/project", get(get_project))
        .route("/api/images/{id}", get(get_image))
        .route("/api/samples", post(post_sample))
        .route("/api/samples/{id}", patch(patch_sample).delete(delete_sample))
        .route("/api/train", post(post_train))
        .route("/api/train/status", get(train_status))
        .route("/api/train/stop", post(train_stop))
        .route("/api/map", get(get_map))
        .route("/api/corrections", post(post_sample))
        .with_state(state)
}

/// Serves the API until the process is interrupted.
pub async fn serve(project: Project, addr: SocketAddr) -> Result<(), Error> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("serving {} on http://{}", project.name, listener.local_addr()?);
    axum::serve(listener, router(AppState::new(project))).await?;
    Ok(())
}
