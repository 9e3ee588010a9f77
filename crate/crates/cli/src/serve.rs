//! Static files of a model directory plus the label endpoints.
//!
//! `GET /topics.json` and any other file in the directory, `GET /labels`,
//! `PUT /labels` with a JSON object of node id to title. Labels whose id is
//! not in the export are returned as rejections and not saved.

use std::fs;
use std::path::{Component, Path, PathBuf};

use anyhow::{anyhow, Result};
use htmot_core::export::{apply_labels, save_labels, Labels};
use htmot_core::TopicTreeExport;
use log::{info, warn};
use serde::Serialize;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::model_dir::{ModelDir, LABELS, TOPICS};

#[derive(Serialize)]
struct PutReply {
    saved: usize,
    rejected: Vec<htmot_core::export::LabelRejection>,
}

type Reply = Response<std::io::Cursor<Vec<u8>>>;

pub fn serve(dir: &Path, port: u16) -> Result<()> {
    let server = Server::http(("127.0.0.1", port)).map_err(|e| anyhow!("binding port {port}: {e}"))?;
    let addr = server.server_addr();
    println!("serving {} on http://{addr}", dir.display());
    let model = ModelDir::new(dir);
    for mut request in server.incoming_requests() {
        let reply = handle(&model, &mut request).unwrap_or_else(|e| {
            warn!("{} {}: {e:#}", request.method(), request.url());
            json_reply(500, &serde_json::json!({ "error": format!("{e:#}") }))
        });
        info!("{} {} -> {}", request.method(), request.url(), reply.status_code().0);
        if let Err(e) = request.respond(reply) {
            warn!("sending response: {e}");
        }
    }
    Ok(())
}

fn handle(model: &ModelDir, request: &mut Request) -> Result<Reply> {
    let url = request.url().split('?').next().unwrap_or("/").to_string();
    match (request.method(), url.as_str()) {
        (Method::Get, "/labels") => Ok(json_reply(200, &model.labels()?)),
        (Method::Put, "/labels") => {
            let mut body = String::new();
            request.as_reader().read_to_string(&mut body)?;
            let labels: Labels = match serde_json::from_str(&body) {
                Ok(l) => l,
                Err(e) => return Ok(json_reply(400, &serde_json::json!({ "error": e.to_string() }))),
            };
            let mut export = TopicTreeExport::load(&model.path(TOPICS))?;
            let rejected = apply_labels(&mut export, &labels);
            let kept: Labels = labels
                .into_iter()
                .filter(|(id, _)| !rejected.iter().any(|r| &r.id == id))
                .collect();
            save_labels(&model.path(LABELS), &kept)?;
            Ok(json_reply(
                200,
                &PutReply {
                    saved: kept.len(),
                    rejected,
                },
            ))
        }
        (Method::Get, path) => {
            let rel = if path == "/" { TOPICS } else { path.trim_start_matches('/') };
            match resolve(&model.root, rel) {
                Some(file) if file.is_file() => {
                    let bytes = fs::read(&file)?;
                    Ok(Response::from_data(bytes).with_header(content_type(&file)))
                }
                _ => Ok(json_reply(404, &serde_json::json!({ "error": "not found" }))),
            }
        }
        _ => Ok(json_reply(405, &serde_json::json!({ "error": "method not allowed" }))),
    }
}

/// Joins a request path onto the served directory, refusing anything that
/// would leave it.
fn resolve(root: &Path, rel: &str) -> Option<PathBuf> {
    let rel = Path::new(rel);
    if rel.components().all(|c| matches!(c, Component::Normal(_))) {
        Some(root.join(rel))
    } else {
        None
    }
}

fn content_type(file: &Path) -> Header {
    let kind = match file.extension().and_then(|e| e.to_str()) {
        Some("json") => "application/json",
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        _ => "text/plain; charset=utf-8",
    };
    Header::from_bytes("Content-Type", kind).expect("static header")
}

fn json_reply(status: u16, body: &impl Serialize) -> Reply {
    let bytes = serde_json::to_vec_pretty(body).expect("serializable reply");
    Response::from_data(bytes)
        .with_status_code(status)
        .with_header(Header::from_bytes("Content-Type", "application/json").expect("static header"))
}
