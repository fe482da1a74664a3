//! HTTP prediction server ("api" deploy target).
//!
//! Endpoints: GET /health, GET /report (the stored training report), and
//! POST /predict with `{"instances": [{"col": value, ...}, ...]}`.
//! Requests are handled concurrently by a small worker pool sharing the
//! immutable model; instances encode through the exact same cell encoder
//! as in-process prediction, so answers match it bit for bit. Well-formed
//! input never produces a 500 — every input fault maps to a 400.

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::thread::JoinHandle;

use tiny_http::{Header, Method, Response, Server};

use crate::automl::{predict_model, ReportFile, TrainedModel};
use crate::data::{encode_cell, Cell, Matrix, TargetValues};

use super::{load_artifact, DeployError};

const WORKERS: usize = 8;

struct ServeState {
    model: TrainedModel,
    report: Option<ReportFile>,
}

pub struct ServerHandle {
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
    addr: SocketAddr,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stop accepting requests and join the workers.
    pub fn shutdown(self) {
        self.server.unblock();
        for worker in self.workers {
            let _ = worker.join();
        }
    }

    /// Serve until the process terminates (Ctrl-C) — used by the `api`
    /// deploy target and `zeroml serve`.
    pub fn join(self) {
        for worker in self.workers {
            let _ = worker.join();
        }
    }
}

/// Serve a loaded model on `addr` (e.g. "127.0.0.1:8080"; port 0 picks a
/// free port).
pub fn serve_model(
    model: TrainedModel,
    report: Option<ReportFile>,
    addr: &str,
) -> Result<ServerHandle, DeployError> {
    let server = Server::http(addr).map_err(|e| DeployError::Serve(format!("cannot bind {addr}: {e}")))?;
    let addr = match server.server_addr() {
        tiny_http::ListenAddr::IP(a) => a,
        other => return Err(DeployError::Serve(format!("unsupported listen address {other:?}"))),
    };
    let server = Arc::new(server);
    let state = Arc::new(ServeState { model, report });
    let workers = (0..WORKERS)
        .map(|_| {
            let server = Arc::clone(&server);
            let state = Arc::clone(&state);
            std::thread::spawn(move || {
                while let Ok(request) = server.recv() {
                    handle(request, &state);
                }
            })
        })
        .collect();
    Ok(ServerHandle { server, workers, addr })
}

/// Load an artifact (and optionally its report file) and serve it. With no
/// explicit report path, a `<artifact>.report.json` sibling is used when
/// present.
pub fn serve_artifact(
    artifact_path: &Path,
    report_path: Option<&Path>,
    addr: &str,
) -> Result<ServerHandle, DeployError> {
    let (model, _) = load_artifact(artifact_path)?;
    let sibling = artifact_path.with_file_name(format!(
        "{}.report.json",
        artifact_path.file_name().unwrap_or_default().to_string_lossy()
    ));
    let report_path = match report_path {
        Some(p) => Some(p.to_path_buf()),
        None if sibling.exists() => Some(sibling),
        None => None,
    };
    let report = match report_path {
        None => None,
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            let file: ReportFile = serde_json::from_str(&text).map_err(|e| DeployError::Format {
                message: format!("report file {}: {e}", path.display()),
                offset: 0,
            })?;
            Some(file)
        }
    };
    serve_model(model, report, addr)
}

fn json_header() -> Header {
    Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..]).expect("valid header")
}

fn respond(request: tiny_http::Request, status: u16, body: serde_json::Value) {
    let response = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(json_header());
    let _ = request.respond(response);
}

fn handle(mut request: tiny_http::Request, state: &ServeState) {
    let url = request.url().split('?').next().unwrap_or("").to_string();
    let method = request.method().clone();
    match (method, url.as_str()) {
        (Method::Get, "/health") => respond(request, 200, serde_json::json!({"status": "ok"})),
        (Method::Get, "/report") => match &state.report {
            Some(report) => {
                let body = serde_json::to_value(report).expect("report serializes");
                respond(request, 200, body)
            }
            None => respond(request, 404, serde_json::json!({"error": "no report available"})),
        },
        (Method::Post, "/predict") => {
            let mut body = Vec::new();
            if request.as_reader().read_to_end(&mut body).is_err() {
                return respond(request, 400, serde_json::json!({"error": "unreadable body"}));
            }
            match predict_instances(state, &body) {
                Ok(value) => respond(request, 200, value),
                Err((status, value)) => respond(request, status, value),
            }
        }
        (_, "/health" | "/report" | "/predict") => {
            respond(request, 405, serde_json::json!({"error": "method not allowed"}))
        }
        _ => respond(request, 404, serde_json::json!({"error": "not found"})),
    }
}

fn bad(message: impl Into<String>) -> (u16, serde_json::Value) {
    (400, serde_json::json!({ "error": message.into() }))
}

fn predict_instances(state: &ServeState, body: &[u8]) -> Result<serde_json::Value, (u16, serde_json::Value)> {
    let parsed: serde_json::Value = serde_json::from_slice(body)
        .map_err(|e| bad(format!("malformed JSON: {e}")))?;
    let instances = parsed
        .get("instances")
        .and_then(|v| v.as_array())
        .ok_or_else(|| bad("body must be {\"instances\": [{...}, ...]}"))?;

    let schema = &state.model.schema;
    let mut objects = Vec::with_capacity(instances.len());
    let mut missing: BTreeSet<&str> = BTreeSet::new();
    for instance in instances {
        let object = instance
            .as_object()
            .ok_or_else(|| bad("every instance must be a JSON object"))?;
        for column in &schema.input_columns {
            if !object.contains_key(column) {
                missing.insert(column);
            }
        }
        objects.push(object);
    }
    if !missing.is_empty() {
        let names: Vec<&str> = missing.into_iter().collect();
        return Err((
            400,
            serde_json::json!({"error": "missing columns", "missing": names}),
        ));
    }

    // Unknown keys in instances are ignored; schema columns encode through
    // the same path as in-process prediction.
    let mut data = Vec::with_capacity(objects.len() * schema.n_features());
    for object in &objects {
        for (column, transform) in schema.input_columns.iter().zip(&schema.transforms) {
            let value = &object[column];
            let cell = json_cell(value).map_err(|msg| bad(format!("column '{column}': {msg}")))?;
            encode_cell(transform, cell, &mut data)
                .map_err(|e| bad(e.to_string()))?;
        }
    }
    let matrix = Matrix {
        rows: objects.len(),
        cols: schema.n_features(),
        data,
    };
    let n_classes = schema.classes().map(|c| c.len()).unwrap_or(0);
    let preds = predict_model(&state.model.params, state.model.task, n_classes, &matrix);
    let predictions: Vec<serde_json::Value> = match &preds {
        // Classification answers class labels as strings.
        TargetValues::Classes(_) => state
            .model
            .prediction_labels(&preds)
            .into_iter()
            .map(serde_json::Value::String)
            .collect(),
        TargetValues::Numeric(values) => values.iter().map(|v| serde_json::json!(v)).collect(),
    };
    Ok(serde_json::json!({ "predictions": predictions }))
}

fn json_cell(value: &serde_json::Value) -> Result<Cell<'_>, String> {
    match value {
        serde_json::Value::Null => Ok(Cell::Missing),
        serde_json::Value::Number(n) => {
            let v = n.as_f64().filter(|v| v.is_finite()).ok_or("non-finite number")?;
            Ok(Cell::Num(v))
        }
        serde_json::Value::String(s) => Ok(Cell::Str(s)),
        serde_json::Value::Bool(b) => Ok(Cell::Bool(*b)),
        other => Err(format!("unsupported value {other}")),
    }
}
