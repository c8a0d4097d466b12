//! HTTP backend for the annotation UI.
//!
//! Frames are the manifest entries, addressed by their index. Annotation
//! writes go through a single lock and an atomic rename, so concurrent
//! PUTs to one frame resolve as last-write-wins.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use udderid::dataset_io::{annotation_from_json, annotation_to_json, load_annotation, save_annotation, Manifest};
use udderid::imaging::{load_grayscale, rotate, rotate_crop};
use udderid::Error;

const INDEX_HTML: &str = include_str!("index.html");

struct AppState {
    manifest: Manifest,
    write_lock: Mutex<()>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct FrameInfo {
    pub id: usize,
    pub cow_id: String,
    pub collection: u32,
    pub day: u32,
    pub has_image: bool,
    pub annotated: bool,
}

fn error(status: StatusCode, kind: &str, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": kind, "message": message.into() }))).into_response()
}

fn unknown_frame(id: usize) -> Response {
    error(StatusCode::NOT_FOUND, "unknown-frame", format!("no frame with id {id}"))
}

/// Router serving the API, plus either the files in `ui_dir` or the
/// built-in page at `/`.
pub fn router(manifest: Manifest, ui_dir: Option<PathBuf>) -> Router {
    let state = Arc::new(AppState { manifest, write_lock: Mutex::new(()) });
    let api = Router::new()
        .route("/api/frames", get(list_frames))
        .route("/api/frames/{id}/image", get(frame_image))
        .route("/api/frames/{id}/annotation", get(get_annotation).put(put_annotation))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX_HTML) })),
    }
}

async fn list_frames(State(st): State<Arc<AppState>>) -> Json<Vec<FrameInfo>> {
    let m = &st.manifest;
    Json(
        m.entries
            .iter()
            .enumerate()
            .map(|(id, e)| FrameInfo {
                id,
                cow_id: e.cow_id.clone(),
                collection: m.collection,
                day: e.day,
                has_image: e.image.is_some(),
                annotated: m.annotation_path(e).is_file(),
            })
            .collect(),
    )
}

async fn frame_image(State(st): State<Arc<AppState>>, Path(id): Path<usize>) -> Response {
    let m = &st.manifest;
    let Some(entry) = m.entries.get(id) else {
        return unknown_frame(id);
    };
    let Some(path) = m.image_path(entry) else {
        return error(StatusCode::NOT_FOUND, "no-image", format!("frame {id} has no image"));
    };
    let rendered = load_grayscale(&path).and_then(|img| match entry.crop {
        Some(rect) => rotate_crop(&img, entry.rotation_deg, rect),
        None => rotate(&img, entry.rotation_deg),
    });
    match rendered {
        Ok(img) => ([(header::CONTENT_TYPE, "image/png")], img.to_png()).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string()),
    }
}

fn json_response(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn get_annotation(State(st): State<Arc<AppState>>, Path(id): Path<usize>) -> Response {
    let m = &st.manifest;
    let Some(entry) = m.entries.get(id) else {
        return unknown_frame(id);
    };
    let path = m.annotation_path(entry);
    if !path.is_file() {
        return error(StatusCode::NOT_FOUND, "not-annotated", format!("frame {id} has no annotation yet"));
    }
    match load_annotation(&path) {
        Ok(ann) => json_response(annotation_to_json(&ann)),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string()),
    }
}

async fn put_annotation(State(st): State<Arc<AppState>>, Path(id): Path<usize>, body: Bytes) -> Response {
    let m = &st.manifest;
    let Some(entry) = m.entries.get(id) else {
        return unknown_frame(id);
    };
    let parsed = std::str::from_utf8(&body)
        .map_err(|e| Error::Parse { context: "request body".into(), reason: e.to_string() })
        .and_then(annotation_from_json);
    let ann = match parsed {
        Ok(a) => a,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.kind(), e.to_string()),
    };
    let path = m.annotation_path(entry);
    let saved = {
        let _guard = st.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        save_annotation(&ann, &path)
    };
    match saved {
        Ok(()) => json_response(annotation_to_json(&ann)),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.kind(), e.to_string()),
    }
}
