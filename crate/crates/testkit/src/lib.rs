//! Local HTTP servers for tests: a static fixture site and a mock encoder.

use std::collections::HashMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Instant;

use tiny_http::{Header, Method, Response, Server};

/// One request as seen by a test server.
#[derive(Debug, Clone)]
pub struct RequestLog {
    pub method: String,
    pub path: String,
    pub at: Instant,
    pub body: String,
}

/// Serves a directory over HTTP on an ephemeral local port.
///
/// Paths listed in `status_overrides` answer with that status and an empty
/// body; `redirects` answer 302 to the given location. Files get a content
/// type from their extension.
pub struct FixtureServer {
    addr: SocketAddr,
    log: Arc<Mutex<Vec<RequestLog>>>,
    server: Arc<Server>,
    handle: Option<JoinHandle<()>>,
}

#[derive(Debug, Default, Clone)]
pub struct FixtureOptions {
    pub status_overrides: HashMap<String, u16>,
    pub redirects: HashMap<String, String>,
}

impl FixtureServer {
    pub fn serve_dir(root: impl Into<PathBuf>) -> Self {
        Self::serve_dir_with(root, FixtureOptions::default())
    }

    pub fn serve_dir_with(root: impl Into<PathBuf>, options: FixtureOptions) -> Self {
        let root = root.into();
        Self::start(move |path, _body| {
            if let Some(status) = options.status_overrides.get(path) {
                return (*status, "text/plain".into(), Vec::new(), None);
            }
            if let Some(target) = options.redirects.get(path) {
                return (302, "text/plain".into(), Vec::new(), Some(target.clone()));
            }
            match resolve(&root, path).and_then(|p| fs::read(&p).ok().map(|b| (p, b))) {
                Some((p, bytes)) => (200, content_type_for(&p).into(), bytes, None),
                None => (404, "text/plain".into(), b"not found".to_vec(), None),
            }
        })
    }

    /// A server answering every request through `handler(path, body)` with
    /// `(status, content_type, body, location)`.
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(&str, &str) -> (u16, String, Vec<u8>, Option<String>) + Send + 'static,
    {
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind test server"));
        let addr = server.server_addr().to_ip().expect("ip listener");
        let log = Arc::new(Mutex::new(Vec::new()));
        let handle = {
            let server = Arc::clone(&server);
            let log = Arc::clone(&log);
            thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    let at = Instant::now();
                    let mut body = String::new();
                    let _ = request.as_reader().read_to_string(&mut body);
                    let path = request.url().to_string();
                    log.lock().unwrap().push(RequestLog {
                        method: method_name(request.method()),
                        path: path.clone(),
                        at,
                        body: body.clone(),
                    });
                    let (status, ctype, bytes, location) = handler(&path, &body);
                    let mut response = Response::from_data(bytes)
                        .with_status_code(status)
                        .with_header(Header::from_bytes("Content-Type", ctype.as_bytes()).unwrap());
                    if let Some(loc) = location {
                        response = response.with_header(Header::from_bytes("Location", loc.as_bytes()).unwrap());
                    }
                    let _ = request.respond(response);
                }
            })
        };
        Self {
            addr,
            log,
            server,
            handle: Some(handle),
        }
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base_url(), path)
    }

    pub fn requests(&self) -> Vec<RequestLog> {
        self.log.lock().unwrap().clone()
    }

    pub fn paths(&self) -> Vec<String> {
        self.requests().into_iter().map(|r| r.path).collect()
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn method_name(m: &Method) -> String {
    m.as_str().to_string()
}

fn resolve(root: &Path, url_path: &str) -> Option<PathBuf> {
    let path = url_path.split(['?', '#']).next().unwrap_or("/");
    let rel = path.trim_start_matches('/');
    if rel.split('/').any(|seg| seg == "..") {
        return None;
    }
    let mut full = root.join(rel);
    if full.is_dir() {
        full = full.join("index.html");
    }
    full.is_file().then_some(full)
}

fn content_type_for(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") | Some("htm") => "text/html; charset=utf-8",
        Some("txt") => "text/plain; charset=utf-8",
        Some("json") => "application/json",
        Some("pdf") => "application/pdf",
        _ => "application/octet-stream",
    }
}

/// Mock dense encoder speaking `{"texts": [...]}` → `{"vectors": [...], "dims": n}`.
///
/// `embed(text)` produces each vector; `reported_dims` is what the server
/// claims in the response (set it wrong to exercise validation).
pub fn mock_encoder<F>(reported_dims: usize, embed: F) -> FixtureServer
where
    F: Fn(&str) -> Vec<f64> + Send + 'static,
{
    FixtureServer::start(move |_path, body| {
        let parsed: serde_json::Value = match serde_json::from_str(body) {
            Ok(v) => v,
            Err(_) => return (400, "text/plain".into(), b"bad json".to_vec(), None),
        };
        let texts: Vec<String> = parsed["texts"]
            .as_array()
            .map(|a| a.iter().filter_map(|t| t.as_str().map(str::to_string)).collect())
            .unwrap_or_default();
        let vectors: Vec<Vec<f64>> = texts.iter().map(|t| embed(t)).collect();
        let out = serde_json::json!({ "vectors": vectors, "dims": reported_dims });
        (200, "application/json".into(), out.to_string().into_bytes(), None)
    })
}
