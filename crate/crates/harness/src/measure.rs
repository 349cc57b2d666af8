//! HTTP client side of the harness.
//!
//! By default a full-page sample is a cold load: the document plus every
//! same-origin stylesheet, script and image it references, fetched the way a
//! browser with an empty cache would. A fragment sample is the fragment plus
//! any images inside it. Document-only loads skip the subresources. Bytes are
//! response bodies only; headers are not counted.

use std::sync::LazyLock;
use std::time::{Duration, Instant};

use campus_core::photo::PhotoUpload;
use regex::Regex;
use reqwest::header::{HeaderMap, HeaderValue, COOKIE, SET_COOKIE};
use reqwest::multipart::{Form, Part};
use reqwest::redirect::Policy;

use crate::ops::Operation;
use crate::report::{Mode, Sample};
use crate::{Error, Result};

const SESSION_COOKIE: &str = "campus_session";

#[derive(Debug, Clone)]
pub struct Client {
    http: reqwest::Client,
    base: String,
}

/// A logged-in client.
#[derive(Debug, Clone)]
pub struct Agent {
    client: Client,
    username: String,
    cookie: HeaderValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub status: u16,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

/// One page or fragment load.
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub bytes: u64,
    pub latency: Duration,
    /// Subresources fetched after the main response.
    pub resources: Vec<String>,
}

impl Client {
    pub fn new(base: &str) -> Result<Self> {
        let http = reqwest::Client::builder()
            .redirect(Policy::none())
            .timeout(Duration::from_secs(30))
            .build()?;
        Ok(Self {
            http,
            base: base.trim_end_matches('/').to_string(),
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn unreachable(&self, e: reqwest::Error) -> Error {
        if e.is_connect() || e.is_timeout() {
            Error::ServerUnreachable {
                url: self.base.clone(),
                reason: e.to_string(),
            }
        } else {
            Error::Http(e)
        }
    }

    pub async fn get(&self, path: &str) -> Result<Fetched> {
        let resp = self.http.get(self.url(path)).send().await.map_err(|e| self.unreachable(e))?;
        fetched(resp).await
    }

    pub async fn login(&self, username: &str, password: &str) -> Result<Agent> {
        let resp = self
            .http
            .post(self.url("/login"))
            .form(&[("username", username), ("password", password)])
            .send()
            .await
            .map_err(|e| self.unreachable(e))?;
        let prefix = format!("{SESSION_COOKIE}=");
        let token = resp
            .headers()
            .get_all(SET_COOKIE)
            .iter()
            .filter_map(|v| v.to_str().ok())
            .find_map(|v| v.split(';').next().filter(|kv| kv.starts_with(&prefix)).map(str::to_string));
        match (resp.status().as_u16(), token) {
            (303, Some(pair)) => Ok(Agent {
                client: self.clone(),
                username: username.to_string(),
                cookie: HeaderValue::from_str(&pair).map_err(|_| Error::AuthFailure(username.into()))?,
            }),
            _ => Err(Error::AuthFailure(username.into())),
        }
    }
}

async fn fetched(resp: reqwest::Response) -> Result<Fetched> {
    let status = resp.status().as_u16();
    let headers = resp.headers().clone();
    let body = resp.bytes().await?.to_vec();
    Ok(Fetched { status, headers, body })
}

fn expect_ok(method: &'static str, path: &str, f: Fetched) -> Result<Fetched> {
    if f.status == 200 {
        Ok(f)
    } else {
        Err(Error::UnexpectedStatus {
            method,
            path: path.to_string(),
            status: f.status,
        })
    }
}

impl Agent {
    pub fn username(&self) -> &str {
        &self.username
    }

    fn request(&self, method: reqwest::Method, path: &str, hx: bool) -> reqwest::RequestBuilder {
        let mut req = self.client.http.request(method, self.client.url(path)).header(COOKIE, self.cookie.clone());
        if hx {
            req = req.header("HX-Request", "true");
        }
        req
    }

    async fn send(&self, req: reqwest::RequestBuilder) -> Result<Fetched> {
        let resp = req.send().await.map_err(|e| self.client.unreachable(e))?;
        fetched(resp).await
    }

    pub async fn get(&self, path: &str, hx: bool) -> Result<Fetched> {
        self.send(self.request(reqwest::Method::GET, path, hx)).await
    }

    pub async fn post_form(&self, path: &str, form: &[(&str, &str)], hx: bool) -> Result<Fetched> {
        self.send(self.request(reqwest::Method::POST, path, hx).form(form)).await
    }

    pub async fn json(&self, path: &str) -> Result<serde_json::Value> {
        let f = expect_ok("GET", path, self.get(path, false).await?)?;
        serde_json::from_slice(&f.body).map_err(|e| Error::Ops(format!("{path} is not JSON: {e}")))
    }

    /// Posts a completion the way the camera module does: multipart fields
    /// `photo`, `thumbnail`, `original_size`, `lat` and `lng`.
    pub async fn complete_with_photo(&self, record: i64, upload: &PhotoUpload, lat: f64, lng: f64) -> Result<Fetched> {
        let form = Form::new()
            .part("photo", Part::bytes(upload.main.clone()).file_name("photo.jpg").mime_str("image/jpeg")?)
            .part("thumbnail", Part::bytes(upload.thumb.clone()).file_name("thumb.jpg").mime_str("image/jpeg")?)
            .text("original_size", upload.original_size.to_string())
            .text("lat", lat.to_string())
            .text("lng", lng.to_string());
        let path = format!("/housekeeping/tasks/{record}/complete");
        self.send(self.request(reqwest::Method::POST, &path, true).multipart(form)).await
    }

    /// Loads `path` in `mode` and times the whole load. With `cold` set the
    /// referenced subresources are fetched too, concurrently, as a browser
    /// with an empty cache would.
    pub async fn load(&self, path: &str, mode: Mode, cold: bool) -> Result<Load> {
        let started = Instant::now();
        let main = expect_ok("GET", path, self.get(path, mode == Mode::Fragment).await?)?;
        let html = String::from_utf8_lossy(&main.body);
        let resources = match (cold, mode) {
            (false, _) => Vec::new(),
            (true, Mode::FullPage) => subresources(&html),
            (true, Mode::Fragment) => images(&html),
        };
        let fetches = resources.iter().map(|r| async move { expect_ok("GET", r, self.get(r, false).await?) });
        let bodies = futures::future::try_join_all(fetches).await?;
        let latency = started.elapsed();
        let bytes = main.body.len() as u64 + bodies.iter().map(|b| b.body.len() as u64).sum::<u64>();
        Ok(Load {
            bytes,
            latency,
            resources,
        })
    }
}

static STYLESHEET: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?i)<link\b[^>]*\brel="stylesheet"[^>]*>"#).expect("valid regex"));
static SCRIPT_OR_IMG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?i)<(?:script|img)\b[^>]*\bsrc="([^"]*)""#).expect("valid regex"));
static IMG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"(?i)<img\b[^>]*\bsrc="([^"]*)""#).expect("valid regex"));
static HREF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"\bhref="([^"]*)""#).expect("valid regex"));

fn same_origin(raw: &str) -> Option<String> {
    let url = raw.replace("&amp;", "&");
    (url.starts_with('/') && !url.starts_with("//")).then_some(url)
}

fn dedup(urls: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for u in urls {
        if !out.contains(&u) {
            out.push(u);
        }
    }
    out
}

/// Same-origin stylesheets, scripts and images a browser would fetch.
pub fn subresources(html: &str) -> Vec<String> {
    let sheets = STYLESHEET
        .find_iter(html)
        .filter_map(|m| HREF.captures(m.as_str()).and_then(|c| same_origin(&c[1])));
    let rest = SCRIPT_OR_IMG.captures_iter(html).filter_map(|c| same_origin(&c[1]));
    dedup(sheets.chain(rest))
}

pub fn images(html: &str) -> Vec<String> {
    dedup(IMG.captures_iter(html).filter_map(|c| same_origin(&c[1])))
}

/// Fills `{id}` from the first element of the operation's resolve list.
pub async fn resolve_path(agent: &Agent, op: &Operation) -> Result<String> {
    let Some(list) = &op.resolve else {
        return Ok(op.path.clone());
    };
    let value = agent.json(list).await?;
    let id = value
        .as_array()
        .and_then(|a| a.iter().find_map(|v| v.get("id")))
        .map(|id| match id {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .ok_or_else(|| Error::Ops(format!("{}: {list} returned no ids", op.name)))?;
    Ok(op.path.replace("{id}", &id))
}

/// Runs each operation `samples` times per mode, alternating modes so slow
/// drift affects both equally. One unrecorded warm-up load per mode first.
/// `cold` selects cold loads over document-only loads.
pub async fn measure(
    client: &Client,
    ops: &[Operation],
    password: &str,
    samples: usize,
    cold: bool,
) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(ops.len() * samples * 2);
    for op in ops {
        let agent = client.login(&op.user, password).await?;
        let path = resolve_path(&agent, op).await?;
        for mode in Mode::ALL {
            agent.load(&path, mode, cold).await?;
        }
        for _ in 0..samples {
            for mode in Mode::ALL {
                let load = agent.load(&path, mode, cold).await?;
                out.push(Sample {
                    operation: op.name.clone(),
                    mode,
                    bytes: load.bytes,
                    latency_ms: load.latency.as_micros() as f64 / 1000.0,
                });
            }
        }
    }
    Ok(out)
}
