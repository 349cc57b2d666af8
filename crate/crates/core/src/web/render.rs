//! Request context, layout and the translation of results into responses
//! for each render mode.

use std::sync::Arc;

use axum::extract::FromRequestParts;
use axum::http::{header, request::Parts, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use chrono::{DateTime, FixedOffset, NaiveDate};
use maud::{html, Markup, DOCTYPE};
use serde::Serialize;

use super::registry::{RenderMode, RouteSpec};
use crate::auth::{EndpointGroup, PermissionMatrix, Session};
use crate::error::{Error, Result};
use crate::Campus;

pub const SESSION_COOKIE: &str = "campus_session";
const ASSET_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lets htmx swap 4xx/5xx bodies (the flash fragment) instead of dropping them.
const HTMX_CONFIG: &str = r#"{"responseHandling":[{"code":"204","swap":false},{"code":"[23]..","swap":true},{"code":"[45]..","swap":true,"error":true}]}"#;

/// What the guard middleware resolved for this request.
#[derive(Clone)]
pub struct Ctx {
    pub campus: Arc<Campus>,
    pub session: Option<Session>,
    pub mode: RenderMode,
    pub route: &'static RouteSpec,
}

impl<S: Send + Sync> FromRequestParts<S> for Ctx {
    type Rejection = StatusCode;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, Self::Rejection> {
        parts.extensions.get::<Ctx>().cloned().ok_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

/// Runs storage work off the async executor.
pub async fn blocking<T, F>(campus: &Arc<Campus>, f: F) -> Result<T>
where
    T: Send + 'static,
    F: FnOnce(&Campus) -> Result<T> + Send + 'static,
{
    let campus = campus.clone();
    tokio::task::spawn_blocking(move || f(&campus))
        .await
        .map_err(|e| Error::Internal(e.to_string()))?
}

impl Ctx {
    fn session_or_err(&self) -> Result<Session> {
        self.session.clone().ok_or(Error::Unauthenticated)
    }

    /// Renders `f`'s markup as a fragment or inside the layout, per mode.
    pub async fn page<F>(self, title: impl Into<String>, f: F) -> Response
    where
        F: FnOnce(&Campus, &Session, RenderMode) -> Result<Markup> + Send + 'static,
    {
        let title = title.into();
        let mode = self.mode;
        let session = match self.session_or_err() {
            Ok(s) => s,
            Err(e) => return error_response(&e, mode, None, &self.campus.perms),
        };
        let s = session.clone();
        let out = blocking(&self.campus, move |c| {
            let body = f(c, &s, mode)?;
            if mode == RenderMode::Fragment {
                return Ok(body.into_string());
            }
            let unread = unread(c, &s)?;
            Ok(layout(&title, Some(&s), &c.perms, unread, body).into_string())
        })
        .await;
        match out {
            Ok(html) => self.html_response(StatusCode::OK, html),
            Err(e) => error_response(&e, mode, Some(&session), &self.campus.perms),
        }
    }

    /// For form posts: a fragment for htmx callers, otherwise a redirect so
    /// a browser refresh does not resubmit.
    pub async fn action<F>(self, redirect: impl Into<String>, f: F) -> Response
    where
        F: FnOnce(&Campus, &Session) -> Result<Markup> + Send + 'static,
    {
        if self.mode == RenderMode::Fragment {
            return self.page("", move |c, s, _| f(c, s)).await;
        }
        let redirect = redirect.into();
        let session = match self.session_or_err() {
            Ok(s) => s,
            Err(e) => return error_response(&e, self.mode, None, &self.campus.perms),
        };
        let s = session.clone();
        match blocking(&self.campus, move |c| f(c, &s)).await {
            Ok(_) => see_other(&redirect),
            Err(e) => error_response(&e, self.mode, Some(&session), &self.campus.perms),
        }
    }

    pub async fn json<T, F>(self, f: F) -> Response
    where
        T: Serialize + Send + 'static,
        F: FnOnce(&Campus, &Session) -> Result<T> + Send + 'static,
    {
        let session = match self.session_or_err() {
            Ok(s) => s,
            Err(e) => return error_response(&e, RenderMode::Json, None, &self.campus.perms),
        };
        let s = session.clone();
        match blocking(&self.campus, move |c| f(c, &s)).await {
            Ok(v) => json_response(StatusCode::OK, &v),
            Err(e) => error_response(&e, RenderMode::Json, Some(&session), &self.campus.perms),
        }
    }

    /// An error response in this request's mode.
    pub fn fail(&self, e: Error) -> Response {
        error_response(&e, self.mode, self.session.as_ref(), &self.campus.perms)
    }

    fn html_response(&self, status: StatusCode, body: String) -> Response {
        let mut resp = (status, html_headers(), body).into_response();
        if self.mode == RenderMode::Fragment {
            if let Some(swap) = self.route.swap {
                resp.headers_mut()
                    .insert("hx-reswap", HeaderValue::from_static(swap.hx_swap()));
            }
        }
        resp
    }
}

fn unread(c: &Campus, s: &Session) -> Result<Option<u64>> {
    if c.perms.allows(s.role(), EndpointGroup::Notifications) {
        c.leave().unread_count(s).map(Some)
    } else {
        Ok(None)
    }
}

fn html_headers() -> [(header::HeaderName, &'static str); 2] {
    [
        (header::CONTENT_TYPE, "text/html; charset=utf-8"),
        (header::CACHE_CONTROL, "no-store"),
    ]
}

pub fn json_response<T: Serialize>(status: StatusCode, v: &T) -> Response {
    match serde_json::to_vec(v) {
        Ok(body) => (status, [(header::CONTENT_TYPE, "application/json")], body).into_response(),
        Err(e) => error_response(&Error::Internal(e.to_string()), RenderMode::Json, None, &PermissionMatrix::builtin()),
    }
}

pub fn see_other(location: &str) -> Response {
    (StatusCode::SEE_OTHER, [(header::LOCATION, location.to_string())]).into_response()
}

pub fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::NotFound | Error::Forbidden => StatusCode::NOT_FOUND,
        Error::Unauthenticated | Error::InvalidCredentials => StatusCode::UNAUTHORIZED,
        Error::WrongStatus
        | Error::WrongState
        | Error::AlreadySubmitted
        | Error::AlreadyResponded
        | Error::InsufficientStock
        | Error::InvalidTransition { .. } => StatusCode::CONFLICT,
        Error::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
        e if e.is_internal() => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

/// A session-less request to a guarded route: HTML callers go to the login
/// page, htmx callers are told to navigate there, JSON callers get a 401.
pub fn unauthenticated(mode: RenderMode) -> Response {
    match mode {
        RenderMode::FullPage => see_other("/login"),
        RenderMode::Fragment => (StatusCode::UNAUTHORIZED, [("hx-redirect", "/login")], "").into_response(),
        RenderMode::Json => json_response(
            StatusCode::UNAUTHORIZED,
            &serde_json::json!({"error": "unauthenticated", "message": "authentication required"}),
        ),
    }
}

/// Maps an error to a response. Role denials render exactly like missing
/// resources so a denied caller learns nothing about what exists.
pub fn error_response(e: &Error, mode: RenderMode, session: Option<&Session>, perms: &PermissionMatrix) -> Response {
    if matches!(e, Error::Unauthenticated) {
        return unauthenticated(mode);
    }
    let status = status_of(e);
    let (code, message) = match status {
        StatusCode::NOT_FOUND => ("not-found", "Not found.".to_string()),
        StatusCode::INTERNAL_SERVER_ERROR => {
            tracing::error!(error = %e, "request failed");
            ("internal", "Something went wrong on the server.".to_string())
        }
        _ => (e.code(), capitalize(&e.to_string())),
    };
    match mode {
        RenderMode::Json => json_response(status, &serde_json::json!({"error": code, "message": message})),
        RenderMode::Fragment => {
            let body = html! { div #flash .flash.error role="alert" { (message) } };
            (
                status,
                [
                    (header::CONTENT_TYPE, "text/html; charset=utf-8"),
                    (header::HeaderName::from_static("hx-retarget"), "#flash"),
                    (header::HeaderName::from_static("hx-reswap"), "outerHTML"),
                ],
                body.into_string(),
            )
                .into_response()
        }
        RenderMode::FullPage => {
            let title = if status == StatusCode::NOT_FOUND { "Not found" } else { "Request failed" };
            let body = html! { div #flash-page .flash.error role="alert" { (message) } };
            (status, html_headers(), layout(title, session, perms, None, body).into_string()).into_response()
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect::<String>() + ".",
        None => String::new(),
    }
}

const NAV: [(EndpointGroup, &str, &str); 5] = [
    (EndpointGroup::HousekeepingView, "Tasks", "/housekeeping/dashboard/"),
    (EndpointGroup::AttendanceManage, "Attendance", "/housekeeping/attendance/"),
    (EndpointGroup::LeaveRequest, "Leave", "/housekeeping/leave/"),
    (EndpointGroup::InventoryView, "Inventory", "/inventory/mobile/"),
    (EndpointGroup::AdminDashboard, "Admin", "/admin/dashboard/"),
];

/// The one document wrapper every full page uses.
pub fn layout(title: &str, session: Option<&Session>, perms: &PermissionMatrix, unread: Option<u64>, body: Markup) -> Markup {
    html! {
        (DOCTYPE)
        html lang="en" {
            head {
                meta charset="utf-8";
                meta name="viewport" content="width=device-width, initial-scale=1";
                meta name="htmx-config" content=(HTMX_CONFIG);
                title { (title) " | Campus Ops" }
                link rel="stylesheet" href={ "/static/campus.css?v=" (ASSET_VERSION) };
                script src={ "/static/htmx.min.js?v=" (ASSET_VERSION) } defer {}
            }
            body {
                header .top {
                    a .brand href="/" { "Campus Ops" }
                    @if let Some(s) = session {
                        nav {
                            @for (group, label, href) in NAV {
                                @if perms.allows(s.role(), group) { a href=(href) { (label) } }
                            }
                            @if let Some(n) = unread { (bell(n)) }
                        }
                        span .user { (s.user.display_name) " (" (s.role().label()) ")" }
                        form method="post" action="/logout" { button .secondary type="submit" { "Sign out" } }
                    }
                }
                main {
                    div #flash .flash {}
                    h1 { (title) }
                    (body)
                }
            }
        }
    }
}

pub fn bell(unread: u64) -> Markup {
    html! {
        a #bell .bell href="/housekeeping/notifications/" hx-get="/housekeeping/notifications/bell"
            hx-trigger="every 60s" hx-swap="outerHTML" {
            "Notifications"
            @if unread > 0 { span .count { (unread) } }
        }
    }
}

pub fn hhmm(t: &DateTime<FixedOffset>) -> String {
    t.format("%H:%M").to_string()
}

pub fn stamp(t: &DateTime<FixedOffset>) -> String {
    t.format("%d %b %H:%M").to_string()
}

pub fn day(d: NaiveDate) -> String {
    d.format("%a %d %b %Y").to_string()
}

/// Parses an optional `YYYY-MM-DD` query value; blank means `default`.
pub fn date_param(v: Option<&str>, default: NaiveDate) -> Result<NaiveDate> {
    match v.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| Error::Invalid(format!("bad date {s:?}, expected YYYY-MM-DD"))),
    }
}

pub fn nonblank(v: Option<String>) -> Option<String> {
    v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

/// The value of one cookie in a `Cookie` header.
pub fn cookie<'a>(headers: &'a axum::http::HeaderMap, name: &str) -> Option<&'a str> {
    headers
        .get_all(header::COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(';'))
        .filter_map(|kv| kv.trim().split_once('='))
        .find(|(k, _)| *k == name)
        .map(|(_, v)| v)
        .filter(|v| !v.is_empty())
}
